#pragma once

// Time-dependent energies E(t, u) with a subgradient selection, and sampled checks of the
// standing assumptions: energy floor, power bound |dE/dt| <= C1 E, Gronwall ratio,
// Frechet subgradient quality and lambda-convexity.

#include "core.hpp"
#include "search.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace dnlab {

/// Scalar external loads.
struct Load {
    enum class Kind { constant, ramp, sine, piecewise_linear };
    Kind kind = Kind::constant;
    double offset = 0.0;
    double slope = 0.0;       // ramp
    double amplitude = 0.0;   // sine: offset + amplitude sin(omega t + phase)
    double omega = 1.0;
    double phase = 0.0;
    std::vector<double> knot_t;   // piecewise_linear, ascending; constant extrapolation
    std::vector<double> knot_v;

    static Load constant(double c)
    {
        Load l;
        l.offset = c;
        return l;
    }
    static Load ramp(double slope, double offset = 0.0)
    {
        Load l;
        l.kind = Kind::ramp;
        l.slope = slope;
        l.offset = offset;
        return l;
    }
    static Load sine(double amplitude, double omega = 1.0, double phase = 0.0, double offset = 0.0)
    {
        Load l;
        l.kind = Kind::sine;
        l.amplitude = amplitude;
        l.omega = omega;
        l.phase = phase;
        l.offset = offset;
        return l;
    }
    static Load piecewise(std::vector<double> ts, std::vector<double> vs)
    {
        if (ts.size() != vs.size() || ts.empty())
            throw Error(ErrorCode::InvalidParameter, "piecewise load needs matching nonempty knots");
        for (std::size_t i = 1; i < ts.size(); ++i)
            if (!(ts[i] > ts[i - 1]))
                throw Error(ErrorCode::InvalidParameter, "load knots must be strictly increasing");
        Load l;
        l.kind = Kind::piecewise_linear;
        l.knot_t = std::move(ts);
        l.knot_v = std::move(vs);
        return l;
    }

    double value(double t) const
    {
        switch (kind) {
        case Kind::constant: return offset;
        case Kind::ramp: return offset + slope * t;
        case Kind::sine: return offset + amplitude * std::sin(omega * t + phase);
        case Kind::piecewise_linear: {
            if (t <= knot_t.front())
                return knot_v.front();
            if (t >= knot_t.back())
                return knot_v.back();
            const auto it = std::upper_bound(knot_t.begin(), knot_t.end(), t);
            const std::size_t i = static_cast<std::size_t>(it - knot_t.begin()) - 1;
            const double s = (t - knot_t[i]) / (knot_t[i + 1] - knot_t[i]);
            return knot_v[i] + s * (knot_v[i + 1] - knot_v[i]);
        }
        }
        return 0.0;
    }

    /// Right derivative.
    double rate(double t) const
    {
        switch (kind) {
        case Kind::constant: return 0.0;
        case Kind::ramp: return slope;
        case Kind::sine: return amplitude * omega * std::cos(omega * t + phase);
        case Kind::piecewise_linear: {
            if (t < knot_t.front() || t >= knot_t.back())
                return 0.0;
            const auto it = std::upper_bound(knot_t.begin(), knot_t.end(), t);
            const std::size_t i = static_cast<std::size_t>(it - knot_t.begin()) - 1;
            return (knot_v[i + 1] - knot_v[i]) / (knot_t[i + 1] - knot_t[i]);
        }
        }
        return 0.0;
    }

    /// Times in (t0, t1) where the load changes direction.
    std::vector<double> turning_points(double t0, double t1) const
    {
        std::vector<double> out;
        if (kind == Kind::sine && amplitude != 0.0 && omega > 0.0) {
            // omega t + phase = pi/2 + k pi
            const double pi = std::acos(-1.0);
            const double k0 = std::ceil((t0 * omega + phase - pi / 2) / pi);
            for (double k = k0;; k += 1.0) {
                const double t = (pi / 2 + k * pi - phase) / omega;
                if (t >= t1)
                    break;
                if (t > t0)
                    out.push_back(t);
            }
        }
        if (kind == Kind::piecewise_linear) {
            for (std::size_t i = 1; i + 1 < knot_t.size(); ++i) {
                const double a = knot_v[i] - knot_v[i - 1];
                const double b = knot_v[i + 1] - knot_v[i];
                if (a * b < 0.0 && knot_t[i] > t0 && knot_t[i] < t1)
                    out.push_back(knot_t[i]);
            }
        }
        return out;
    }
};

struct Energy {
    int dim = 1;
    double horizon = 1.0;
    double floor = 1.0;      // C0
    std::function<double(double, const Vec&)> eval;
    std::function<double(double, const Vec&)> time_deriv;
    std::function<Vec(double, const Vec&)> subgrad;
    std::function<Mat(double, const Vec&)> hessian;   // optional
    Vec box_lo;
    Vec box_hi;
    std::string label;

    bool in_box(const Vec& u) const
    {
        return (u.array() >= box_lo.array()).all() && (u.array() <= box_hi.array()).all();
    }

    /// Hessian from the oracle, or central differences of the subgradient.
    Mat hessian_at(double t, const Vec& u) const
    {
        if (hessian)
            return hessian(t, u);
        Mat h(dim, dim);
        for (int i = 0; i < dim; ++i) {
            const double step = 1e-6 * (1.0 + std::abs(u[i]));
            Vec a = u, b = u;
            a[i] += step;
            b[i] -= step;
            h.col(i) = (subgrad(t, a) - subgrad(t, b)) / (2.0 * step);
        }
        return 0.5 * (h + h.transpose());
    }
};

/// E = k/2 |u - l(t) dir|^2 + c0 on a box of half width `half_width`.
inline Energy tracking_energy(int dim, double k, const Load& load, Vec direction = {}, double half_width = 10.0,
                              double c0 = 1.0, double horizon = 1.0)
{
    if (!(k > 0.0) || !(c0 > 0.0))
        throw Error(ErrorCode::InvalidParameter, "tracking energy needs k > 0 and c0 > 0");
    if (direction.size() == 0) {
        direction = Vec::Zero(dim);
        direction[0] = 1.0;
    }
    Energy e;
    e.dim = dim;
    e.horizon = horizon;
    e.floor = c0;
    e.eval = [=](double t, const Vec& u) { return 0.5 * k * (u - load.value(t) * direction).squaredNorm() + c0; };
    e.time_deriv = [=](double t, const Vec& u) {
        return -k * (u - load.value(t) * direction).dot(direction) * load.rate(t);
    };
    e.subgrad = [=](double t, const Vec& u) -> Vec { return k * (u - load.value(t) * direction); };
    e.hessian = [=](double, const Vec&) -> Mat { return k * Mat::Identity(dim, dim); };
    e.box_lo = Vec::Constant(dim, -half_width);
    e.box_hi = Vec::Constant(dim, half_width);
    e.label = "tracking";
    return e;
}

namespace detail {

/// Deterministic sample points filling a box: a tensor grid for d <= 2, Halton beyond.
inline std::vector<Vec> box_samples(const Vec& lo, const Vec& hi, int n)
{
    const int d = static_cast<int>(lo.size());
    std::vector<Vec> out;
    if (d <= 2) {
        const int per = std::max(2, static_cast<int>(std::round(std::pow(n, 1.0 / d))));
        long total = 1;
        for (int i = 0; i < d; ++i)
            total *= per;
        for (long m = 0; m < total; ++m) {
            Vec p(d);
            long rem = m;
            for (int i = 0; i < d; ++i) {
                p[i] = lo[i] + (hi[i] - lo[i]) * static_cast<double>(rem % per) / (per - 1);
                rem /= per;
            }
            out.push_back(p);
        }
    }
    else {
        for (int m = 1; m <= n; ++m) {
            Vec p(d);
            for (int i = 0; i < d; ++i)
                p[i] = lo[i] + (hi[i] - lo[i]) * halton(m, kPrimes[i % 16]);
            out.push_back(p);
        }
    }
    return out;
}

inline std::vector<double> time_samples(double horizon, int n)
{
    std::vector<double> ts;
    n = std::max(n, 2);
    for (int i = 0; i < n; ++i)
        ts.push_back(horizon * i / (n - 1));
    return ts;
}

} // namespace detail

struct FloorCheck {
    double min_value = kInf;
    bool pass(double floor, double tol = 1e-9) const { return min_value >= floor - tol; }
};

inline FloorCheck energy_floor_check(const Energy& e, int n_samples = 400)
{
    FloorCheck c;
    const int nt = std::max(2, static_cast<int>(std::sqrt(n_samples)));
    for (double t : detail::time_samples(e.horizon, nt))
        for (const Vec& u : detail::box_samples(e.box_lo, e.box_hi, std::max(2, n_samples / nt)))
            c.min_value = std::min(c.min_value, e.eval(t, u));
    return c;
}

struct FrechetReport {
    double value = kInf;                 // min over radii
    std::vector<double> radii;
    std::vector<double> per_radius;      // min over probes at each radius
};

/// min over radii r and probes v with |v - u| = r of [E(t,v) - E(t,u) - <xi, v - u>] / r,
/// where xi is `selection` (or the energy's own subgradient when empty).
inline FrechetReport frechet_residual_check(const Energy& e, double t, const Vec& u, double probe_radius,
                                            int n_probes, const Vec& selection = {})
{
    if (!(probe_radius > 0.0))
        throw Error(ErrorCode::InvalidParameter, "probe radius must be positive");
    if (!e.in_box(u))
        throw Error(ErrorCode::DomainExit, "state outside the domain box");
    const Vec xi = selection.size() == e.dim ? selection : e.subgrad(t, u);
    std::vector<Vec> dirs;
    for (int i = 0; i < e.dim; ++i)
        for (double s : {1.0, -1.0}) {
            Vec d = Vec::Zero(e.dim);
            d[i] = s;
            dirs.push_back(d);
        }
    std::mt19937_64 rng(23);
    std::normal_distribution<double> g(0.0, 1.0);
    while (static_cast<int>(dirs.size()) < n_probes) {
        Vec d(e.dim);
        for (int i = 0; i < e.dim; ++i)
            d[i] = g(rng);
        dirs.push_back(d / d.norm());
    }
    const double eu = e.eval(t, u);
    FrechetReport rep;
    for (double scale : {1.0, 0.1, 0.01}) {
        const double r = probe_radius * scale;
        double worst = kInf;
        for (const Vec& d : dirs) {
            const Vec v = u + r * d;
            if (!e.in_box(v))
                throw Error(ErrorCode::DomainExit, "Frechet probe left the domain box");
            worst = std::min(worst, (e.eval(t, v) - eu - xi.dot(v - u)) / r);
        }
        rep.radii.push_back(r);
        rep.per_radius.push_back(worst);
        rep.value = std::min(rep.value, worst);
    }
    return rep;
}

/// max over samples of |dE/dt| / E, including t = 0 and t = T.
inline double power_bound_estimate(const Energy& e, int n_samples = 4000)
{
    if (n_samples < 1)
        throw Error(ErrorCode::InvalidParameter, "n_samples must be >= 1");
    const int nt = std::max(2, static_cast<int>(std::sqrt(n_samples)));
    double c1 = 0.0;
    for (double t : detail::time_samples(e.horizon, nt))
        for (const Vec& u : detail::box_samples(e.box_lo, e.box_hi, std::max(2, n_samples / nt)))
            c1 = std::max(c1, std::abs(e.time_deriv(t, u)) / e.eval(t, u));
    return c1;
}

/// Largest lambda with E(t, mid) <= (E(t,u0) + E(t,u1))/2 - lambda/8 |u0 - u1|^2 on the
/// sampled pairs.
inline double lambda_convexity_estimate(const Energy& e, double t, int n_pairs = 400)
{
    const Vec width = e.box_hi - e.box_lo;
    const double diam = width.norm();
    std::vector<Vec> centres = detail::box_samples(e.box_lo, e.box_hi, n_pairs);
    centres.push_back(0.5 * (e.box_lo + e.box_hi));
    std::mt19937_64 rng(29);
    std::normal_distribution<double> g(0.0, 1.0);
    double lam = kInf;
    for (const Vec& c : centres) {
        for (double sep : {1e-2, 1e-3}) {
            Vec d(e.dim);
            for (int i = 0; i < e.dim; ++i)
                d[i] = g(rng);
            d *= 0.5 * sep * diam / d.norm();
            const Vec u0 = c - d, u1 = c + d;
            if (!e.in_box(u0) || !e.in_box(u1))
                continue;
            const double gap = 0.5 * (e.eval(t, u0) + e.eval(t, u1)) - e.eval(t, c);
            lam = std::min(lam, 8.0 * gap / (u1 - u0).squaredNorm());
        }
    }
    return lam;
}

/// lambda_convexity_estimate minimised over uniformly spaced time slices.
inline double lambda_convexity_profile(const Energy& e, int n_slices = 5, int n_pairs = 400)
{
    double lam = kInf;
    for (double t : detail::time_samples(e.horizon, n_slices))
        lam = std::min(lam, lambda_convexity_estimate(e, t, n_pairs));
    return lam;
}

struct GronwallReport {
    double worst_ratio = 1.0;    // max over u of sup_t E / inf_t E
    double bound = 1.0;          // exp(C1 T)
    bool pass = true;
};

inline GronwallReport gronwall_check(const Energy& e, double c1, int n_samples = 400)
{
    GronwallReport r;
    r.bound = std::exp(c1 * e.horizon);
    const std::vector<double> ts = detail::time_samples(e.horizon, 64);
    for (const Vec& u : detail::box_samples(e.box_lo, e.box_hi, n_samples)) {
        double hi = -kInf, lo = kInf;
        for (double t : ts) {
            const double v = e.eval(t, u);
            hi = std::max(hi, v);
            lo = std::min(lo, v);
        }
        r.worst_ratio = std::max(r.worst_ratio, hi / lo);
    }
    r.pass = r.worst_ratio <= r.bound * (1.0 + 1e-9);
    return r;
}

} // namespace dnlab
