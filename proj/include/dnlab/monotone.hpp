#pragma once

// Monotone operators on R^d x R^d: closed-form families, skew perturbations and sampled
// graphs, with graph parametrisations used by the numeric representative functions.

#include "convex.hpp"
#include "core.hpp"
#include "gauge.hpp"

#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace dnlab {

enum class OpKind { subdiff_pnorm, subdiff_gauge, linear, skew_perturbed, sampled };

inline const char* to_string(OpKind k)
{
    switch (k) {
    case OpKind::subdiff_pnorm: return "subdiff_pnorm";
    case OpKind::subdiff_gauge: return "subdiff_gauge";
    case OpKind::linear: return "linear";
    case OpKind::skew_perturbed: return "skew_perturbed";
    case OpKind::sampled: return "sampled";
    }
    return "unknown";
}

using GraphPair = std::pair<Vec, Vec>;

struct MonotoneOp {
    OpKind kind = OpKind::linear;
    int dim = 1;
    double p = 2.0;                              // subdiff_pnorm
    double weight = 1.0;                         // subdiff_pnorm, subdiff_gauge
    std::shared_ptr<const GaugeBody> body;       // subdiff_gauge
    Mat matrix;                                  // linear: A; skew_perturbed: J
    Mat resolvent;                               // linear: (I + A)^-1
    Mat sym_pinv;                                // linear: pseudo-inverse of (A + A^T)/2
    Mat sym_kernel;                              // linear: orthonormal basis of its kernel
    std::shared_ptr<const MonotoneOp> base;      // skew_perturbed
    double eps = 0.0;                            // skew_perturbed
    std::vector<GraphPair> samples;              // sampled
    bool contains_origin_pair = true;
    bool cyclic = true;
    std::string label;

    /// Gauge-type operators: subdifferentials of positively 1-homogeneous potentials.
    bool one_homogeneous() const
    {
        return kind == OpKind::subdiff_gauge || (kind == OpKind::subdiff_pnorm && p == 1.0);
    }
};

/// Constructor parameters; `kind` selects which fields are read.
struct OperatorSpec {
    OpKind kind = OpKind::linear;
    int dim = 1;
    double p = 2.0;
    double weight = 1.0;
    std::shared_ptr<const GaugeBody> body;
    Mat matrix;
    std::shared_ptr<const MonotoneOp> base;
    double eps = 0.0;
    std::vector<GraphPair> samples;
};

inline MonotoneOp make_operator(const OperatorSpec& spec)
{
    MonotoneOp op;
    op.kind = spec.kind;
    op.dim = spec.dim;
    switch (spec.kind) {
    case OpKind::subdiff_pnorm:
        if (!(spec.p >= 1.0))
            throw Error(ErrorCode::InvalidParameter, "p must be >= 1");
        if (!(spec.weight > 0.0))
            throw Error(ErrorCode::InvalidParameter, "weight R must be positive");
        op.p = spec.p;
        op.weight = spec.weight;
        op.label = "pnorm";
        break;
    case OpKind::subdiff_gauge:
        if (!spec.body)
            throw Error(ErrorCode::InvalidParameter, "gauge operator needs a body");
        if (!(spec.weight > 0.0))
            throw Error(ErrorCode::InvalidParameter, "weight R must be positive");
        if (!spec.body->membership(Vec::Zero(spec.body->dim)))
            throw Error(ErrorCode::InvalidParameter, "body must contain the origin");
        op.dim = spec.body->dim;
        op.body = spec.body;
        op.weight = spec.weight;
        op.label = "gauge";
        break;
    case OpKind::linear: {
        const Mat& a = spec.matrix;
        if (a.rows() != a.cols() || a.rows() < 1)
            throw Error(ErrorCode::InvalidParameter, "linear operator needs a square matrix");
        const Mat sym = 0.5 * (a + a.transpose());
        Eigen::SelfAdjointEigenSolver<Mat> es(sym);
        if (es.eigenvalues().minCoeff() < -1e-12)
            throw Error(ErrorCode::InvalidParameter, "linear operator is not monotone");
        op.dim = static_cast<int>(a.rows());
        op.matrix = a;
        {
            const double lmax = std::max(es.eigenvalues().maxCoeff(), 0.0);
            op.sym_pinv = Mat::Zero(op.dim, op.dim);
            std::vector<Vec> kernel;
            for (int i = 0; i < op.dim; ++i) {
                const Vec v = es.eigenvectors().col(i);
                const double lam = es.eigenvalues()[i];
                if (lam > 1e-12 * std::max(1.0, lmax))
                    op.sym_pinv += v * v.transpose() / lam;
                else
                    kernel.push_back(v);
            }
            op.sym_kernel = Mat(op.dim, static_cast<Eigen::Index>(kernel.size()));
            for (std::size_t i = 0; i < kernel.size(); ++i)
                op.sym_kernel.col(static_cast<Eigen::Index>(i)) = kernel[i];
        }
        op.resolvent = (Mat::Identity(op.dim, op.dim) + a).inverse();
        op.cyclic = (a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-14;
        op.label = "linear";
        break;
    }
    case OpKind::skew_perturbed: {
        if (!spec.base)
            throw Error(ErrorCode::InvalidParameter, "skew perturbation needs a base operator");
        const Mat& j = spec.matrix;
        if (j.rows() != spec.base->dim || j.cols() != spec.base->dim)
            throw Error(ErrorCode::InvalidParameter, "skew matrix dimension mismatch");
        if ((j + j.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw Error(ErrorCode::InvalidParameter, "J is not skew within 1e-12");
        if (!(spec.eps >= 0.0))
            throw Error(ErrorCode::InvalidParameter, "eps must be nonnegative");
        op.dim = spec.base->dim;
        op.base = spec.base;
        op.eps = spec.eps;
        op.matrix = 0.5 * (j - j.transpose());   // exactly skew
        op.contains_origin_pair = spec.base->contains_origin_pair;
        op.cyclic = spec.eps == 0.0 && spec.base->cyclic;
        op.label = "skew(" + spec.base->label + ")";
        break;
    }
    case OpKind::sampled: {
        for (const auto& [x, y] : spec.samples)
            if (x.size() != spec.dim || y.size() != spec.dim)
                throw Error(ErrorCode::InvalidParameter, "sample dimension mismatch");
        op.samples = spec.samples;
        op.contains_origin_pair = false;
        for (const auto& [x, y] : spec.samples)
            if (x.isZero(0.0) && y.isZero(0.0))
                op.contains_origin_pair = true;
        op.cyclic = false;
        op.label = "sampled";
        break;
    }
    }
    return op;
}

// Convenience constructors ---------------------------------------------------------------

inline MonotoneOp identity_op(int dim = 1)
{
    OperatorSpec s;
    s.kind = OpKind::linear;
    s.matrix = Mat::Identity(dim, dim);
    MonotoneOp op = make_operator(s);
    op.label = "identity";
    return op;
}

inline MonotoneOp linear_op(const Mat& a)
{
    OperatorSpec s;
    s.kind = OpKind::linear;
    s.matrix = a;
    return make_operator(s);
}

inline MonotoneOp pnorm_op(int dim, double p, double weight = 1.0)
{
    OperatorSpec s;
    s.kind = OpKind::subdiff_pnorm;
    s.dim = dim;
    s.p = p;
    s.weight = weight;
    return make_operator(s);
}

inline MonotoneOp gauge_op(std::shared_ptr<const GaugeBody> body, double weight = 1.0)
{
    OperatorSpec s;
    s.kind = OpKind::subdiff_gauge;
    s.body = std::move(body);
    s.weight = weight;
    return make_operator(s);
}

/// Subdifferential of R|.| on the line.
inline MonotoneOp abs_op(double weight = 1.0)
{
    return gauge_op(std::make_shared<GaugeBody>(interval_body(1.0)), weight);
}

inline MonotoneOp skew_op(const MonotoneOp& base, double eps, const Mat& j)
{
    OperatorSpec s;
    s.kind = OpKind::skew_perturbed;
    s.base = std::make_shared<MonotoneOp>(base);
    s.eps = eps;
    s.matrix = j;
    return make_operator(s);
}

inline MonotoneOp sampled_op(int dim, std::vector<GraphPair> pairs)
{
    OperatorSpec s;
    s.kind = OpKind::sampled;
    s.dim = dim;
    s.samples = std::move(pairs);
    return make_operator(s);
}

// Graph access --------------------------------------------------------------------------

/// Potential psi with alpha = d psi, for cyclic operators and the base of skew perturbations.
inline ConvexFn potential(const MonotoneOp& op)
{
    switch (op.kind) {
    case OpKind::subdiff_pnorm:
        return power_norm_fn(op.dim, op.p, op.weight);
    case OpKind::subdiff_gauge:
        return gauge_fn(op.body, op.weight);
    case OpKind::linear: {
        if (!op.cyclic)
            throw Error(ErrorCode::InvalidParameter, "nonsymmetric linear operator has no potential");
        ConvexFn f;
        f.dim = op.dim;
        const Mat a = op.matrix;
        f.eval = [a](const Vec& x) { return 0.5 * x.dot(a * x); };
        f.subgrad = [a](const Vec& x) -> Vec { return a * x; };
        f.prox = [a](const Vec& w, double g) -> Vec {
            return (Mat::Identity(a.rows(), a.cols()) + g * a).ldlt().solve(w);
        };
        Eigen::SelfAdjointEigenSolver<Mat> es(a);
        if (es.eigenvalues().minCoeff() > 1e-12) {
            const Mat inv = a.inverse();
            f.conjugate = [inv](const Vec& y) { return 0.5 * y.dot(inv * y); };
        }
        f.label = "quadratic_form";
        return f;
    }
    case OpKind::skew_perturbed:
        return potential(*op.base);
    case OpKind::sampled:
        break;
    }
    throw Error(ErrorCode::InvalidParameter, "operator has no potential");
}

/// One element of alpha(x) (minimal-norm choice where alpha is multivalued at 0).
inline Vec select(const MonotoneOp& op, const Vec& x)
{
    switch (op.kind) {
    case OpKind::subdiff_pnorm: {
        const double n = x.norm();
        if (n == 0.0)
            return Vec::Zero(op.dim);
        return op.weight * std::pow(n, op.p - 2.0) * x;
    }
    case OpKind::subdiff_gauge: {
        const double n = x.norm();
        if (n == 0.0)
            return Vec::Zero(op.dim);
        // far points in direction x project onto the exposed face of R K*
        return op.weight * polar_project(*op.body, x * (1e8 / n));
    }
    case OpKind::linear:
        return op.matrix * x;
    case OpKind::skew_perturbed:
        return select(*op.base, x) + op.eps * (op.matrix * x);
    case OpKind::sampled: {
        if (op.samples.empty())
            throw Error(ErrorCode::GraphEmpty, "sampled operator has no pairs");
        std::size_t best = 0;
        double bd = kInf;
        for (std::size_t i = 0; i < op.samples.size(); ++i) {
            const double d = (op.samples[i].first - x).norm();
            if (d < bd) {
                bd = d;
                best = i;
            }
        }
        return op.samples[best].second;
    }
    }
    return Vec::Zero(op.dim);
}

/// Direct graph membership test with relative tolerance.
inline bool in_graph(const MonotoneOp& op, const Vec& x, const Vec& y, double tol = 1e-9)
{
    switch (op.kind) {
    case OpKind::subdiff_pnorm: {
        const double n = x.norm();
        if (op.p == 1.0 && n == 0.0)
            return y.norm() <= op.weight * (1.0 + tol);
        return (y - select(op, x)).norm() <= tol * (1.0 + y.norm());
    }
    case OpKind::subdiff_gauge: {
        if (!polar_membership(*op.body, y / op.weight, 17, tol))
            return false;
        const double psi = op.weight * gauge_eval(*op.body, x);
        return y.dot(x) >= psi - tol * (1.0 + std::abs(psi));
    }
    case OpKind::linear:
        return (y - op.matrix * x).norm() <= tol * (1.0 + y.norm());
    case OpKind::skew_perturbed:
        return in_graph(*op.base, x, y - op.eps * (op.matrix * x), tol);
    case OpKind::sampled:
        for (const auto& [a, b] : op.samples)
            if ((a - x).norm() <= tol * (1.0 + x.norm()) && (b - y).norm() <= tol * (1.0 + y.norm()))
                return true;
        return false;
    }
    return false;
}

/// Surjective parametrisation z -> (x0, y0) of graph(alpha) by R^d.  Resolvent (Minty)
/// coordinates for gauges and linear maps; explicit radial coordinates for p-norms so
/// that both the steep part near x0 = 0 and the tail are resolved when p is close to 1.
inline GraphPair graph_point(const MonotoneOp& op, const Vec& z)
{
    switch (op.kind) {
    case OpKind::subdiff_pnorm: {
        if (op.p == 1.0) {
            const double s = z.norm();
            if (s <= op.weight)
                return {Vec::Zero(op.dim), z};
            return {z * (1.0 - op.weight / s), z * (op.weight / s)};
        }
        const double s = z.norm();
        if (s == 0.0)
            return {Vec::Zero(op.dim), Vec::Zero(op.dim)};
        const Vec w = z / s;
        const double r = op.weight;
        if (s <= r)
            return {w * std::pow(s / r, 1.0 / (op.p - 1.0)), w * s};
        const double len = s - r + 1.0;
        return {w * len, w * (r * std::pow(len, op.p - 1.0))};
    }
    case OpKind::subdiff_gauge: {
        const Vec y0 = op.weight * polar_project(*op.body, z / op.weight);
        return {z - y0, y0};
    }
    case OpKind::linear: {
        const Vec x0 = op.resolvent * z;
        return {x0, op.matrix * x0};
    }
    case OpKind::skew_perturbed: {
        auto [x0, y0] = graph_point(*op.base, z);
        Vec y = y0 + op.eps * (op.matrix * x0);
        return {std::move(x0), std::move(y)};
    }
    case OpKind::sampled:
        break;
    }
    throw Error(ErrorCode::InvalidParameter, "sampled operators have no graph parametrisation");
}

/// A parameter z whose graph point is close to (x, y); exact when (x, y) is on the graph.
inline Vec graph_coordinate(const MonotoneOp& op, const Vec& x, const Vec& y)
{
    switch (op.kind) {
    case OpKind::subdiff_pnorm: {
        if (op.p == 1.0)
            return x + y;
        const double nx = x.norm();
        const double ny = y.norm();
        const double r = op.weight;
        if (nx <= 1.0) {
            if (ny == 0.0)
                return Vec::Zero(op.dim);
            return y;
        }
        const Vec w = x / nx;
        return w * (nx + r - 1.0);
    }
    case OpKind::subdiff_gauge:
    case OpKind::linear:
        return x + y;
    case OpKind::skew_perturbed:
        return graph_coordinate(*op.base, x, y - op.eps * (op.matrix * x));
    case OpKind::sampled:
        break;
    }
    return x + y;
}

struct MonotonicityCheck {
    double worst = 0.0;   // most negative <y - y0, x - x0> / (1 + |x - x0| |y - y0|)
    int pairs = 0;
};

/// Monotonicity of the operator on random graph pairs.
inline MonotonicityCheck check_monotone(const MonotoneOp& op, int n = 200, unsigned seed = 5)
{
    std::vector<GraphPair> pts;
    if (op.kind == OpKind::sampled) {
        pts = op.samples;
    }
    else {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-3.0, 3.0);
        for (int i = 0; i < n; ++i) {
            Vec z(op.dim);
            for (int k = 0; k < op.dim; ++k)
                z[k] = u(rng);
            pts.push_back(graph_point(op, z));
        }
    }
    MonotonicityCheck c;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const Vec dx = pts[i].first - pts[j].first;
            const Vec dy = pts[i].second - pts[j].second;
            c.worst = std::min(c.worst, dy.dot(dx) / (1.0 + dx.norm() * dy.norm()));
            ++c.pairs;
        }
    return c;
}

struct CoercivityReport {
    double p = 2.0;
    double q = 2.0;
    double c = 0.0;    // largest c with <y,x> >= c (|x|^p + |y|^q) - c3 on the samples
    double c3 = 0.0;
};

/// Empirical coercivity constants on a sampled graph, for exponents p and q = p/(p-1).
inline CoercivityReport coercivity_estimate(const MonotoneOp& op, double p, int n = 400,
                                            unsigned seed = 9)
{
    CoercivityReport r;
    r.p = p;
    r.q = p > 1.0 ? p / (p - 1.0) : kInf;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    std::vector<std::pair<double, double>> vals;   // (<y,x>, growth)
    for (int i = 0; i < n; ++i) {
        Vec z(op.dim);
        for (int k = 0; k < op.dim; ++k)
            z[k] = u(rng);
        const auto [x, y] = op.kind == OpKind::sampled ? op.samples[static_cast<std::size_t>(i) % op.samples.size()]
                                                       : graph_point(op, z);
        const double growth =
            std::pow(x.norm(), p) + (std::isinf(r.q) ? 0.0 : std::pow(y.norm(), r.q));
        vals.emplace_back(y.dot(x), growth);
    }
    // c from the large-growth tail, c3 absorbing the rest
    double cmin = kInf;
    for (const auto& [pair_val, growth] : vals)
        if (growth > 10.0)
            cmin = std::min(cmin, pair_val / growth);
    r.c = std::isinf(cmin) ? 0.0 : std::max(cmin, 0.0);
    for (const auto& [pair_val, growth] : vals)
        r.c3 = std::max(r.c3, r.c * growth - pair_val);
    return r;
}

} // namespace dnlab
