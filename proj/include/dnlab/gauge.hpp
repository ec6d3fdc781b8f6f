#pragma once

// Closed convex bodies containing the origin, their Minkowski gauges and polar sets.

#include "core.hpp"
#include "roots.hpp"
#include "search.hpp"

#include <functional>
#include <random>
#include <string>

namespace dnlab {

struct GaugeBody {
    int dim = 1;
    std::function<bool(const Vec&)> membership;
    std::function<double(const Vec&)> support;         // optional: h_K(y) = sup_{x in K} <y, x>
    std::function<Vec(const Vec&)> polar_projection;   // optional: Euclidean projection onto K*
    double scale_cap = 1e6;
    std::string label;
};

inline double gauge_eval(const GaugeBody& k, const Vec& x)
{
    require_finite(x, "gauge_eval: non-finite point");
    const double n = x.norm();
    if (n == 0.0)
        return 0.0;
    // bisect along the unit direction; positive homogeneity restores the scale
    const Vec u = x / n;
    double lo = 1e-12, hi = k.scale_cap;
    if (k.membership(u / lo))
        return 0.0;
    if (!k.membership(u / hi))
        return kInf;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (k.membership(u / mid))
            hi = mid;
        else
            lo = mid;
    }
    return n * hi;
}

/// Support function h_K(y).  Without an analytic oracle this maximises <y, w>/M_K(w) over
/// directions w, seeded with `probe_budget` points per axis.
inline double support_eval(const GaugeBody& k, const Vec& y, int probe_budget = 17)
{
    require_finite(y, "support_eval: non-finite direction");
    if (probe_budget < 1)
        throw Error(ErrorCode::InvalidParameter, "probe_budget must be >= 1");
    if (k.support)
        return k.support(y);
    if (y.isZero(0.0))
        return 0.0;
    bool unbounded = false;
    auto ratio = [&](const Vec& w) -> double {
        const double n = w.norm();
        if (n < 1e-3)
            return -kInf;
        const Vec u = w / n;
        const double s = y.dot(u);
        const double g = gauge_eval(k, u);
        if (g <= 0.0) {
            if (s > 0.0)
                unbounded = true;
            return s > 0.0 ? kInf : -kInf;
        }
        return s / g;
    };
    SearchOptions opts;
    opts.radius = 1.0;
    opts.seeds_per_axis = std::max(probe_budget, 3);
    opts.expand = false;
    opts.step_tol = 1e-10;
    opts.max_evaluations = 400'000;
    opts.extra_seeds.push_back(y / y.norm());
    try {
        const SearchResult r = maximize(ratio, k.dim, opts);
        if (unbounded || r.unbounded)
            return kInf;
        return r.value;
    }
    catch (const Error& e) {
        throw Error(ErrorCode::InconclusiveProbe, e.what());
    }
}

/// Decides <y, x> <= 1 for all x in K, up to `tol`.
inline bool polar_membership(const GaugeBody& k, const Vec& y, int probe_budget = 17,
                             double tol = 1e-9)
{
    return support_eval(k, y, probe_budget) <= 1.0 + tol;
}

/// Euclidean projection onto the polar set K* = { h_K <= 1 }.
inline Vec polar_project(const GaugeBody& k, const Vec& z)
{
    if (k.polar_projection)
        return k.polar_projection(z);
    if (support_eval(k, z) <= 1.0)
        return z;
    if (k.dim > 3)
        throw Error(ErrorCode::DimensionTooLarge, "numeric polar projection needs dim <= 3");
    // nearest boundary point w/h_K(w) over directions w
    auto dist = [&](const Vec& w) -> double {
        const double n = w.norm();
        if (n < 1e-6)
            return kInf;
        const double h = support_eval(k, w / n);
        if (!(h > 0.0) || std::isinf(h))
            return kInf;
        return ((w / n) / h - z).norm();
    };
    SearchOptions opts;
    opts.radius = 1.0;
    opts.seeds_per_axis = 9;
    opts.expand = false;
    opts.extra_seeds.push_back(z / z.norm());
    const SearchResult r = minimize(dist, k.dim, opts);
    const Vec w = r.arg / r.arg.norm();
    return w / support_eval(k, w);
}

// ---------------------------------------------------------------------------------------
// Bodies with closed-form oracles

/// K = [-a, a] in R.
inline GaugeBody interval_body(double half_width)
{
    if (!(half_width > 0.0))
        throw Error(ErrorCode::InvalidParameter, "interval half width must be positive");
    GaugeBody k;
    k.dim = 1;
    k.membership = [a = half_width](const Vec& x) { return std::abs(x[0]) <= a; };
    k.support = [a = half_width](const Vec& y) { return a * std::abs(y[0]); };
    k.polar_projection = [a = half_width](const Vec& z) {
        return vec1(std::clamp(z[0], -1.0 / a, 1.0 / a));
    };
    k.label = "interval";
    return k;
}

inline GaugeBody euclidean_ball(int dim, double radius = 1.0)
{
    if (!(radius > 0.0) || dim < 1)
        throw Error(ErrorCode::InvalidParameter, "ball needs dim >= 1 and radius > 0");
    GaugeBody k;
    k.dim = dim;
    k.membership = [radius](const Vec& x) { return x.norm() <= radius; };
    k.support = [radius](const Vec& y) { return radius * y.norm(); };
    k.polar_projection = [radius](const Vec& z) -> Vec {
        const double n = z.norm();
        const double r = 1.0 / radius;
        return n <= r ? z : Vec(z * (r / n));
    };
    k.label = "ball";
    return k;
}

/// K = { sum_i (x_i / a_i)^2 <= 1 }, whose gauge is a weighted Euclidean norm.
inline GaugeBody ellipse_body(const Vec& semi_axes)
{
    if (semi_axes.size() < 1 || (semi_axes.array() <= 0.0).any())
        throw Error(ErrorCode::InvalidParameter, "ellipse semi axes must be positive");
    GaugeBody k;
    k.dim = static_cast<int>(semi_axes.size());
    k.membership = [a = semi_axes](const Vec& x) { return x.cwiseQuotient(a).squaredNorm() <= 1.0; };
    k.support = [a = semi_axes](const Vec& y) { return y.cwiseProduct(a).norm(); };
    // K* = { sum (a_i y_i)^2 <= 1 }: project via the multiplier of the KKT system.
    k.polar_projection = [a = semi_axes](const Vec& z) -> Vec {
        if (z.cwiseProduct(a).squaredNorm() <= 1.0)
            return z;
        const Vec b2 = a.cwiseInverse().array().square();
        auto excess = [&](double mu) {
            const Vec y = z.cwiseProduct(b2).cwiseQuotient((b2.array() + mu).matrix());
            return 1.0 - y.cwiseProduct(a).squaredNorm();
        };
        double hi = 1.0;
        while (excess(hi) < 0.0)
            hi *= 2.0;
        const double mu = bracketed_root(excess, 0.0, hi);
        return z.cwiseProduct(b2).cwiseQuotient((b2.array() + mu).matrix());
    };
    k.label = "ellipse";
    return k;
}

/// K = { sum_i w_i |x_i| <= 1 }; zero weights make K unbounded along those axes and
/// collapse K* (a box with half widths w_i) onto them.
inline GaugeBody weighted_l1_body(const Vec& weights)
{
    if (weights.size() < 1 || (weights.array() < 0.0).any() || !(weights.maxCoeff() > 0.0))
        throw Error(ErrorCode::InvalidParameter, "weights must be nonnegative and not all zero");
    GaugeBody k;
    k.dim = static_cast<int>(weights.size());
    k.membership = [w = weights](const Vec& x) { return w.dot(x.cwiseAbs()) <= 1.0; };
    k.support = [w = weights](const Vec& y) {
        double h = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            if (w[i] == 0.0) {
                if (y[i] != 0.0)
                    return kInf;
                continue;
            }
            h = std::max(h, std::abs(y[i]) / w[i]);
        }
        return h;
    };
    k.polar_projection = [w = weights](const Vec& z) -> Vec {
        Vec p = z;
        for (Eigen::Index i = 0; i < z.size(); ++i)
            p[i] = std::clamp(z[i], -w[i], w[i]);
        return p;
    };
    k.label = "weighted_l1";
    return k;
}

/// K = prod_i [-a_i, a_i]; K* is the weighted l1 ball { sum a_i |y_i| <= 1 }.
inline GaugeBody box_body(const Vec& half_widths)
{
    if (half_widths.size() < 1 || (half_widths.array() <= 0.0).any())
        throw Error(ErrorCode::InvalidParameter, "box half widths must be positive");
    GaugeBody k;
    k.dim = static_cast<int>(half_widths.size());
    k.membership = [a = half_widths](const Vec& x) { return (x.cwiseAbs().array() <= a.array()).all(); };
    k.support = [a = half_widths](const Vec& y) { return a.dot(y.cwiseAbs()); };
    k.polar_projection = [a = half_widths](const Vec& z) -> Vec {
        if (a.dot(z.cwiseAbs()) <= 1.0)
            return z;
        auto shrunk = [&](double lam) {
            return (z.cwiseAbs().array() - lam * a.array()).max(0.0).matrix();
        };
        auto excess = [&](double lam) { return 1.0 - a.dot(shrunk(lam)); };
        const double hi = (z.cwiseAbs().cwiseQuotient(a)).maxCoeff();
        const double lam = bracketed_root(excess, 0.0, hi);
        return shrunk(lam).cwiseProduct(z.cwiseSign());
    };
    k.label = "box";
    return k;
}

struct BodyCheck {
    bool contains_origin = false;
    bool star_shaped = true;
};

/// Sampled validity: origin membership and star-shapedness along rays through members.
inline BodyCheck check_body(const GaugeBody& k, int samples = 200, unsigned seed = 7)
{
    BodyCheck c;
    c.contains_origin = k.membership(Vec::Zero(k.dim));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int s = 0; s < samples; ++s) {
        Vec x(k.dim);
        for (int i = 0; i < k.dim; ++i)
            x[i] = u(rng);
        if (!k.membership(x))
            continue;
        for (double lam : {0.0, 0.25, 0.5, 0.9})
            if (!k.membership(lam * x))
                c.star_shaped = false;
    }
    return c;
}

} // namespace dnlab
