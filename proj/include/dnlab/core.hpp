#pragma once

// Shared vocabulary: vectors, extended reals, tolerances and the error type.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dnlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Values at or above this cap are treated as +infinity by every numeric pipeline.
inline constexpr double kValueCap = 1e6;

inline bool is_infinite(double v, double cap = kValueCap) { return !(v < cap); }

/// Clamp an extended real: anything at or above the cap becomes +inf.
inline double cap_value(double v, double cap = kValueCap) { return is_infinite(v, cap) ? kInf : v; }

struct Tolerances {
    double abs = 1e-8;
    double rel = 1e-6;
    double value_cap = kValueCap;

    double scaled(double magnitude) const { return abs + rel * std::abs(magnitude); }
};

enum class ErrorCode {
    NonFiniteInput,
    OptimizerDiverged,
    InconclusiveProbe,
    EmptyDomain,
    GraphEmpty,
    DimensionTooLarge,
    InvalidParameter,
    SearchFailed,
    DomainExit,
    InnerSolveFailed,
    NonDecreasingObjective,
    SplittingDiverged,
    JumpPresent,
    NotHomogeneous,
    IOFailure,
    ConfigError,
};

inline const char* to_string(ErrorCode c)
{
    switch (c) {
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::OptimizerDiverged: return "OptimizerDiverged";
    case ErrorCode::InconclusiveProbe: return "InconclusiveProbe";
    case ErrorCode::EmptyDomain: return "EmptyDomain";
    case ErrorCode::GraphEmpty: return "GraphEmpty";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::SearchFailed: return "SearchFailed";
    case ErrorCode::DomainExit: return "DomainExit";
    case ErrorCode::InnerSolveFailed: return "InnerSolveFailed";
    case ErrorCode::NonDecreasingObjective: return "NonDecreasingObjective";
    case ErrorCode::SplittingDiverged: return "SplittingDiverged";
    case ErrorCode::JumpPresent: return "JumpPresent";
    case ErrorCode::NotHomogeneous: return "NotHomogeneous";
    case ErrorCode::IOFailure: return "IOFailure";
    case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline void require_finite(const Vec& v, const char* what)
{
    if (!v.allFinite())
        throw Error(ErrorCode::NonFiniteInput, what);
}

inline double pairing(const Vec& x, const Vec& y) { return x.dot(y); }

inline Vec vec1(double a)
{
    Vec v(1);
    v << a;
    return v;
}

inline Vec vec2(double a, double b)
{
    Vec v(2);
    v << a, b;
    return v;
}

inline Vec concat(const Vec& a, const Vec& b)
{
    Vec out(a.size() + b.size());
    out << a, b;
    return out;
}

/// Rotation by +pi/2 in the plane.
inline Mat quarter_rotation()
{
    Mat q(2, 2);
    q << 0.0, -1.0, 1.0, 0.0;
    return q;
}

} // namespace dnlab
