#pragma once

// Representative functions of monotone operators: Fitzpatrick (minimal), Penot (maximal),
// bipotentials, and the Bauschke-Wang self-dual representative; graph membership through
// the Fitzpatrick gap and the recession of the Fitzpatrick function.

#include "convex.hpp"
#include "legendre.hpp"
#include "monotone.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace dnlab {

inline double pairing_eval(const Vec& x, const Vec& y)
{
    require_finite(x, "pairing_eval: non-finite x");
    require_finite(y, "pairing_eval: non-finite y");
    return x.dot(y);
}

struct ReprOptions {
    bool closed_form = true;        // false forces the numeric path
    int seeds_per_axis = 33;
    double value_cap = kValueCap;
    double refine_rel_tol = 1e-4;   // agreement between successive refinement levels
};

struct SupResult {
    double value = -kInf;
    bool unbounded = false;     // sup exceeded the value cap and was reported as +inf
    bool closed_form = false;
    bool refined = true;        // successive levels agreed
    long evaluations = 0;
};

namespace detail {

/// 1/4 b^T A_s^+ b with b = y + A^T x, +inf if b leaves range(A_s).
inline double linear_fitzpatrick(const MonotoneOp& op, const Vec& x, const Vec& y)
{
    const Vec b = y + op.matrix.transpose() * x;
    if (op.sym_kernel.cols() > 0 && (op.sym_kernel.transpose() * b).norm() > 1e-9 * (1.0 + b.norm()))
        return kInf;
    return 0.25 * b.dot(op.sym_pinv * b);
}

inline double scalar_fitzpatrick(double a, const Vec& x, const Vec& y)
{
    return 0.25 * (y + a * x).squaredNorm() / a;
}

inline bool has_closed_fitzpatrick(const MonotoneOp& op)
{
    switch (op.kind) {
    case OpKind::linear:
    case OpKind::subdiff_gauge:
    case OpKind::sampled:
        return true;
    case OpKind::subdiff_pnorm:
        return op.p == 1.0 || op.p == 2.0;
    case OpKind::skew_perturbed:
        return has_closed_fitzpatrick(*op.base);
    }
    return false;
}

/// psi(x) + psi*(y) for 1-homogeneous potentials: R M_K(x) + indicator of R K*.
inline double gauge_bipotential(const MonotoneOp& op, const Vec& x, const Vec& y)
{
    if (op.kind == OpKind::subdiff_pnorm)
        return y.norm() <= op.weight * (1.0 + kPolarTol) ? op.weight * x.norm() : kInf;
    if (!polar_membership(*op.body, y / op.weight, 17, kPolarTol))
        return kInf;
    return op.weight * gauge_eval(*op.body, x);
}

inline double closed_fitzpatrick(const MonotoneOp& op, const Vec& x, const Vec& y)
{
    switch (op.kind) {
    case OpKind::linear:
        return linear_fitzpatrick(op, x, y);
    case OpKind::subdiff_gauge:
        return gauge_bipotential(op, x, y);
    case OpKind::subdiff_pnorm:
        if (op.p == 1.0)
            return gauge_bipotential(op, x, y);
        return scalar_fitzpatrick(op.weight, x, y);
    case OpKind::skew_perturbed:
        return closed_fitzpatrick(*op.base, x, y - op.eps * (op.matrix * x));
    case OpKind::sampled: {
        if (op.samples.empty())
            throw Error(ErrorCode::GraphEmpty, "sampled operator has no pairs");
        double best = -kInf;
        for (const auto& [x0, y0] : op.samples)
            best = std::max(best, y.dot(x0) + y0.dot(x - x0));
        return best;
    }
    }
    return kInf;
}

inline SupResult numeric_fitzpatrick(const MonotoneOp& op, const Vec& x, const Vec& y,
                                     const ReprOptions& o)
{
    if (op.kind == OpKind::sampled) {
        SupResult r;
        r.value = closed_fitzpatrick(op, x, y);
        r.evaluations = static_cast<long>(op.samples.size());
        return r;
    }
    auto obj = [&](const Vec& z) {
        const auto [x0, y0] = graph_point(op, z);
        return y.dot(x0) + y0.dot(x - x0);
    };
    SearchOptions s;
    s.radius = std::max(10.0, 2.0 * (x.norm() + y.norm()) + 2.0 * op.weight);
    s.value_cap = o.value_cap;
    s.extra_seeds = {graph_coordinate(op, x, select(op, x)), graph_coordinate(op, x, y), y};
    // two refinement levels of the seeding grid; a third only when they disagree (d <= 2)
    std::vector<int> levels = {std::max(3, o.seeds_per_axis / 2 + 1), o.seeds_per_axis};
    if (op.dim <= 2)
        levels.push_back(2 * o.seeds_per_axis - 1);
    SupResult out;
    double previous = -kInf;
    for (std::size_t l = 0; l < levels.size(); ++l) {
        s.seeds_per_axis = levels[l];
        const SearchResult r = maximize(obj, op.dim, s);
        out.evaluations += r.evaluations;
        if (r.unbounded) {
            out.value = kInf;
            out.unbounded = true;
            return out;
        }
        out.value = std::max(out.value, r.value);
        if (l > 0 &&
            std::abs(out.value - previous) <= o.refine_rel_tol * std::max(1.0, std::abs(out.value))) {
            out.refined = true;
            return out;
        }
        out.refined = false;
        previous = out.value;
    }
    return out;
}

} // namespace detail

/// f_alpha(x, y) = sup over graph pairs (x0, y0) of <y, x0> + <y0, x - x0>.
inline SupResult fitzpatrick_sup(const MonotoneOp& op, const Vec& x, const Vec& y,
                                 const ReprOptions& o = {})
{
    require_finite(x, "fitzpatrick_eval: non-finite x");
    require_finite(y, "fitzpatrick_eval: non-finite y");
    if (o.closed_form && detail::has_closed_fitzpatrick(op)) {
        SupResult r;
        r.value = cap_value(detail::closed_fitzpatrick(op, x, y), o.value_cap);
        r.unbounded = std::isinf(r.value);
        r.closed_form = true;
        return r;
    }
    return detail::numeric_fitzpatrick(op, x, y, o);
}

inline double fitzpatrick_eval(const MonotoneOp& op, const Vec& x, const Vec& y,
                               const ReprOptions& o = {})
{
    return fitzpatrick_sup(op, x, y, o).value;
}

/// rho_alpha = (pi + I_alpha)**, the largest representative.
inline double penot_eval(const MonotoneOp& op, const Vec& x, const Vec& y, const ReprOptions& o = {})
{
    require_finite(x, "penot_eval: non-finite x");
    require_finite(y, "penot_eval: non-finite y");
    if (o.closed_form) {
        switch (op.kind) {
        case OpKind::linear:
            // pi on the graph, +inf elsewhere
            return (y - op.matrix * x).norm() <= 1e-9 * (1.0 + y.norm()) ? x.dot(y) : kInf;
        case OpKind::subdiff_gauge:
            return cap_value(detail::gauge_bipotential(op, x, y), o.value_cap);
        case OpKind::subdiff_pnorm:
            if (op.p == 1.0)
                return cap_value(detail::gauge_bipotential(op, x, y), o.value_cap);
            if (op.p == 2.0)
                return (y - op.weight * x).norm() <= 1e-9 * (1.0 + y.norm()) ? x.dot(y) : kInf;
            break;
        case OpKind::skew_perturbed:
            // the shear (x, y) -> (x, y + eps J x) maps graph(base) onto graph(op) and preserves pi
            if (detail::has_closed_fitzpatrick(*op.base) && op.base->kind != OpKind::sampled)
                return penot_eval(*op.base, x, y - op.eps * (op.matrix * x), o);
            break;
        case OpKind::sampled:
            break;
        }
    }
    if (op.dim > 3)
        throw Error(ErrorCode::DimensionTooLarge, "numeric Penot function needs dim <= 3");
    // rho = f_alpha^{*T}: sup over (a, b) of <y, a> + <b, x> - f_alpha(a, b)
    const int d = op.dim;
    ReprOptions inner = o;
    inner.closed_form = true;
    auto obj = [&](const Vec& w) -> double {
        const double f = fitzpatrick_eval(op, w.head(d), w.tail(d), inner);
        if (!(f < o.value_cap))
            return -kInf;
        return y.dot(w.head(d)) + x.dot(w.tail(d)) - f;
    };
    SearchOptions s;
    s.radius = std::max(10.0, 2.0 * (x.norm() + y.norm()));
    s.seeds_per_axis = d == 1 ? o.seeds_per_axis : 9;
    s.value_cap = o.value_cap;
    s.extra_seeds = {concat(x, select(op, x)), concat(x, y)};
    const SearchResult r = maximize(obj, 2 * d, s);
    return r.unbounded ? kInf : cap_value(r.value, o.value_cap);
}

inline double bipotential_eval(const ConvexFn& psi, const Vec& x, const Vec& y,
                               const ConjugateOptions& o = {})
{
    require_finite(x, "bipotential_eval: non-finite x");
    const double a = psi.eval(x);
    if (!(a < o.value_cap))
        return kInf;
    const double b = conjugate_eval(psi, y, o);
    return cap_value(a + b, o.value_cap);
}

// Bauschke-Wang self-dual representative ------------------------------------------------
//
// BW(w) = 1/2 inf_z { F(w + z) + F^{*T}(w - z) + |z|^2 }, the proximal average of the
// Fitzpatrick function F and its transposed conjugate (the Penot function).  With
// q = |.|^2/2 and H = (F + q)*, the identity (F^{*T} + q)* = q - H^T (T swaps the two
// halves) turns it into BW = Phi* - q with Phi = (H + q - H^T)/2, which is evaluated here
// by nested strongly concave maximisations.

struct BwOptions {
    int seeds_per_axis = 5;
    int inner_seeds_per_axis = 3;
    double value_cap = kValueCap;
};

namespace detail {

inline Vec swap_halves(const Vec& w)
{
    const Eigen::Index d = w.size() / 2;
    return concat(w.tail(d), w.head(d));
}

/// H(s) = sup_w <s, w> - F(w) - |w|^2/2.
inline double bw_h(const MonotoneOp& op, const Vec& s, const BwOptions& o)
{
    const int d = op.dim;
    auto obj = [&](const Vec& w) -> double {
        const double f = fitzpatrick_eval(op, w.head(d), w.tail(d));
        if (!(f < o.value_cap))
            return -kInf;
        return s.dot(w) - f - 0.5 * w.squaredNorm();
    };
    SearchOptions so;
    so.center = 0.5 * s;
    so.radius = 4.0 + s.norm();
    so.seeds_per_axis = o.inner_seeds_per_axis;
    so.refine_starts = 1;
    so.step_tol = 1e-9;
    so.rotations = 0;
    so.value_cap = kInf;
    so.extra_seeds = {s, Vec::Zero(2 * d)};
    return maximize(obj, 2 * d, so).value;
}

} // namespace detail

inline double selfdual_bw_eval(const MonotoneOp& op, const Vec& x, const Vec& y,
                               const BwOptions& o = {})
{
    require_finite(x, "selfdual_bw_eval: non-finite x");
    require_finite(y, "selfdual_bw_eval: non-finite y");
    if (op.dim > 2)
        throw Error(ErrorCode::DimensionTooLarge, "self-dual representative needs dim <= 2");
    const Vec w0 = concat(x, y);
    auto obj = [&](const Vec& s) -> double {
        const double h = detail::bw_h(op, s, o);
        const double ht = detail::bw_h(op, detail::swap_halves(s), o);
        if (!std::isfinite(h) || !std::isfinite(ht))
            return -kInf;
        return s.dot(w0) - 0.5 * h - 0.25 * s.squaredNorm() + 0.5 * ht;
    };
    SearchOptions so;
    so.center = w0;
    so.radius = 4.0 + w0.norm();
    so.seeds_per_axis = o.seeds_per_axis;
    so.refine_starts = 1;
    so.step_tol = 1e-9;
    so.rotations = 0;
    so.value_cap = o.value_cap;
    so.extra_seeds = {2.0 * w0, concat(x + y, x + y)};
    const SearchResult r = maximize(obj, 2 * op.dim, so);
    if (r.unbounded)
        return kInf;
    return cap_value(r.value - 0.5 * w0.squaredNorm(), o.value_cap);
}

struct BwGridOptions {
    double half_width = 9.0;
    std::size_t points = 1801;
    double trusted = 3.0;    // BW is trusted on |x|, |y| <= trusted
};

/// Grid tabulation of BW on [-L, L]^2 (d = 1) with discrete Legendre transforms, and its
/// conjugate from the trusted window.
struct BwGrid {
    Grid2 bw;
    Grid2 bw_conj;
    double value(double x, double y) const { return interpolate(bw, x, y); }
    double conj(double x, double y) const { return interpolate(bw_conj, x, y); }

    static double interpolate(const Grid2& g, double x, double y)
    {
        const auto& a = g.axis;
        const double h = a[1] - a[0];
        const double fi = (x - a.front()) / h;
        const double fj = (y - a.front()) / h;
        if (fi < 0.0 || fj < 0.0 || fi > static_cast<double>(a.size() - 1) ||
            fj > static_cast<double>(a.size() - 1))
            return kInf;
        const std::size_t i = std::min(static_cast<std::size_t>(fi), a.size() - 2);
        const std::size_t j = std::min(static_cast<std::size_t>(fj), a.size() - 2);
        const double u = fi - static_cast<double>(i), v = fj - static_cast<double>(j);
        return (1 - u) * (1 - v) * g.at(i, j) + u * (1 - v) * g.at(i + 1, j) +
               (1 - u) * v * g.at(i, j + 1) + u * v * g.at(i + 1, j + 1);
    }
};

inline BwGrid selfdual_bw_grid(const MonotoneOp& op, const BwGridOptions& o = {})
{
    if (op.dim != 1)
        throw Error(ErrorCode::DimensionTooLarge, "grid self-dual representative needs dim = 1");
    const std::vector<double> axis = uniform_axis(o.half_width, o.points);
    const std::size_t n = axis.size();
    auto q = [&](std::size_t i, std::size_t j) { return 0.5 * (axis[i] * axis[i] + axis[j] * axis[j]); };

    Grid2 g{axis, std::vector<double>(n * n)};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double f = fitzpatrick_eval(op, vec1(axis[i]), vec1(axis[j]));
            g.at(i, j) = std::isfinite(f) ? f + q(i, j) : kInf;
        }
    const Grid2 h = discrete_conjugate_2d(g);
    Grid2 phi{axis, std::vector<double>(n * n)};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            phi.at(i, j) = 0.5 * h.at(i, j) + 0.5 * q(i, j) - 0.5 * h.at(j, i);
    Grid2 bw = discrete_conjugate_2d(phi);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            bw.at(i, j) -= q(i, j);

    Grid2 window = bw;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (std::abs(axis[i]) > o.trusted || std::abs(axis[j]) > o.trusted)
                window.at(i, j) = kInf;
    return {bw, discrete_conjugate_2d(window)};
}

struct SelfDualityReport {
    std::vector<double> residuals;    // |BW(x, y) - BW*(y, x)| per point
    double worst = 0.0;
};

/// Self-duality residual at the given points: pointwise BW against the grid conjugate.
inline SelfDualityReport selfdual_residual(const MonotoneOp& op,
                                           const std::vector<std::pair<double, double>>& points,
                                           const BwGridOptions& go = {}, const BwOptions& bo = {})
{
    const BwGrid grid = selfdual_bw_grid(op, go);
    SelfDualityReport r;
    for (const auto& [x, y] : points) {
        const double v = selfdual_bw_eval(op, vec1(x), vec1(y), bo);
        const double res = std::abs(v - grid.conj(y, x));
        r.residuals.push_back(res);
        r.worst = std::max(r.worst, res);
    }
    return r;
}

/// A representative evaluated at one point together with the pairing floor.
struct ReprSample {
    Vec x;
    Vec y;
    double value = 0.0;
    double baseline = 0.0;
    double margin() const { return value - baseline; }
};

struct MembershipResult {
    bool member = false;
    double residual = 0.0;   // f_alpha(x, y) - <x, y>
};

inline MembershipResult graph_membership_test(const MonotoneOp& op, const Vec& x, const Vec& y,
                                              double tol, const ReprOptions& o = {})
{
    if (!(tol > 0.0))
        throw Error(ErrorCode::InvalidParameter, "membership tolerance must be positive");
    const double pi = pairing_eval(x, y);
    const double f = fitzpatrick_eval(op, x, y, o);
    MembershipResult r;
    r.residual = f - pi;
    r.member = r.residual <= tol * (1.0 + std::abs(pi));
    return r;
}

struct FitzRecessionOptions {
    bool closed_form = true;
    double t_max = 1e8;
};

/// Difference quotients of the numeric Fitzpatrick function along (x, y), with the
/// monotonicity flag of the ladder.
inline RecessionResult fitz_recession_ladder(const MonotoneOp& op, const Vec& x, const Vec& y, double t_max)
{
    require_finite(x, "fitz_recession_ladder: non-finite x");
    require_finite(y, "fitz_recession_ladder: non-finite y");
    const int d = op.dim;
    ConvexFn f;
    f.dim = 2 * d;
    ReprOptions uncapped;
    uncapped.value_cap = kInf;
    f.eval = [&op, d, uncapped](const Vec& w) {
        return fitzpatrick_eval(op, w.head(d), w.tail(d), uncapped);
    };
    return recession_eval(f, concat(x, y), t_max);
}

/// f_alpha^inf(x, y) = sup over graph pairs of <y, x0> + <y0, x>.
inline double fitz_recession_eval(const MonotoneOp& op, const Vec& x, const Vec& y,
                                  const FitzRecessionOptions& o = {})
{
    require_finite(x, "fitz_recession_eval: non-finite x");
    require_finite(y, "fitz_recession_eval: non-finite y");
    if (o.closed_form) {
        switch (op.kind) {
        case OpKind::subdiff_gauge:
            if (!y.isZero(0.0))
                return kInf;
            return op.weight * gauge_eval(*op.body, x);
        case OpKind::subdiff_pnorm:
            if (op.p == 1.0)
                return y.isZero(0.0) ? op.weight * x.norm() : kInf;
            // the graph is unbounded along every ray in both variables
            return (x.isZero(0.0) && y.isZero(0.0)) ? 0.0 : kInf;
        case OpKind::linear: {
            const Vec b = y + op.matrix.transpose() * x;
            return b.norm() <= 1e-12 * (1.0 + y.norm() + x.norm()) ? 0.0 : kInf;
        }
        case OpKind::skew_perturbed:
            return fitz_recession_eval(*op.base, x, y - op.eps * (op.matrix * x), o);
        case OpKind::sampled: {
            double best = -kInf;
            for (const auto& [x0, y0] : op.samples)
                best = std::max(best, y.dot(x0) + y0.dot(x));
            return best;
        }
        }
    }
    return fitz_recession_ladder(op, x, y, o.t_max).value;
}

} // namespace dnlab
