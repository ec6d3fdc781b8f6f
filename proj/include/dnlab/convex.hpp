#pragma once

// Proper convex functions on R^d given by oracles, and the conjugation machinery on top
// of them: numeric conjugates and biconjugates, recession functions, sampled validity
// checks.  Library potentials (quadratics, powers of the Euclidean norm, gauges, affine
// maps, point indicators) carry analytic conjugates and proximal maps.

#include "core.hpp"
#include "gauge.hpp"
#include "roots.hpp"
#include "search.hpp"

#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace dnlab {

struct ConvexFn {
    int dim = 1;
    std::function<double(const Vec&)> eval;
    std::function<double(const Vec&)> conjugate;          // optional
    std::function<Vec(const Vec&)> subgrad;               // optional
    std::function<Vec(const Vec&, double)> prox;          // optional: (w, step) -> argmin
    double dom_box_radius = 10.0;
    bool one_homogeneous = false;                         // declared, checked on demand
    std::string label;
};

struct ConjugateOptions {
    bool use_analytic = true;
    int seeds_per_axis = 33;
    double value_cap = kValueCap;
};

inline SearchOptions conjugate_search(const ConvexFn& f, const ConjugateOptions& o)
{
    SearchOptions s;
    s.radius = f.dom_box_radius;
    s.seeds_per_axis = o.seeds_per_axis;
    s.value_cap = o.value_cap;
    return s;
}

/// f*(y) = sup_x { <y, x> - f(x) }, +inf above the value cap.
inline double conjugate_eval(const ConvexFn& f, const Vec& y, const ConjugateOptions& o = {})
{
    require_finite(y, "conjugate_eval: non-finite dual point");
    if (o.use_analytic && f.conjugate)
        return cap_value(f.conjugate(y), o.value_cap);
    auto obj = [&](const Vec& x) -> double {
        const double fx = f.eval(x);
        if (!std::isfinite(fx))
            return -kInf;
        return y.dot(x) - fx;
    };
    const SearchResult r = maximize(obj, f.dim, conjugate_search(f, o));
    return r.unbounded ? kInf : cap_value(r.value, o.value_cap);
}

/// f**(x) by two nested numeric conjugations.
inline double biconjugate_eval(const ConvexFn& f, const Vec& x, const ConjugateOptions& o = {})
{
    ConvexFn g;
    g.dim = f.dim;
    g.dom_box_radius = f.dom_box_radius;
    g.eval = [&f, o](const Vec& y) { return conjugate_eval(f, y, o); };
    ConjugateOptions outer = o;
    outer.use_analytic = false;
    return conjugate_eval(g, x, outer);
}

struct RecessionResult {
    double value = 0.0;
    Vec base;
    std::vector<std::pair<double, double>> ladder;   // (t, quotient)
    bool monotone = true;
};

inline Vec find_domain_point(const ConvexFn& f, double cap = kValueCap)
{
    Vec zero = Vec::Zero(f.dim);
    const double f0 = f.eval(zero);
    if (std::isfinite(f0) && f0 < cap)
        return zero;
    for (double r = 1e-3; r <= f.dom_box_radius * (1.0 + 1e-12); r *= 2.0) {
        for (int i = 0; i < f.dim; ++i)
            for (double s : {1.0, -1.0}) {
                Vec p = Vec::Zero(f.dim);
                p[i] = s * r;
                const double v = f.eval(p);
                if (std::isfinite(v) && v < cap)
                    return p;
            }
    }
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-f.dom_box_radius, f.dom_box_radius);
    for (int n = 0; n < 2000; ++n) {
        Vec p(f.dim);
        for (int i = 0; i < f.dim; ++i)
            p[i] = u(rng);
        const double v = f.eval(p);
        if (std::isfinite(v) && v < cap)
            return p;
    }
    throw Error(ErrorCode::EmptyDomain, "no finite-value base point in the search box");
}

/// Recession function by the increasing difference quotient along t = 1, 10, ..., t_max.
inline RecessionResult recession_eval(const ConvexFn& f, const Vec& z, double t_max,
                                      const Tolerances& tol = {})
{
    require_finite(z, "recession_eval: non-finite direction");
    if (!(t_max >= 1.0))
        throw Error(ErrorCode::InvalidParameter, "t_max must be >= 1");
    RecessionResult out;
    out.base = find_domain_point(f, tol.value_cap);
    const double f0 = f.eval(out.base);
    std::vector<double> ts;
    for (double t = 1.0; t < t_max * (1.0 - 1e-12); t *= 10.0)
        ts.push_back(t);
    ts.push_back(t_max);
    double prev = -kInf;
    for (double t : ts) {
        const double ft = f.eval(out.base + t * z);
        const double q = std::isfinite(ft) ? cap_value((ft - f0) / t, tol.value_cap) : kInf;
        out.ladder.emplace_back(t, q);
        if (q < prev - tol.scaled(prev))
            out.monotone = false;
        prev = q;
        if (std::isinf(q))
            break;
    }
    out.value = cap_value(out.ladder.back().second, tol.value_cap);
    return out;
}

// ---------------------------------------------------------------------------------------
// Sampled validity checks

struct SampleCheck {
    double worst = 0.0;   // most negative slack observed
    int samples = 0;
    bool pass(double tol) const { return worst >= -tol; }
};

namespace detail {
inline Vec random_point(int dim, double radius, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-radius, radius);
    Vec p(dim);
    for (int i = 0; i < dim; ++i)
        p[i] = u(rng);
    return p;
}
} // namespace detail

/// Slack (f(x)+f(y))/2 - f((x+y)/2) over random pairs with both values finite.
inline SampleCheck check_midpoint_convexity(const ConvexFn& f, int pairs = 300, unsigned seed = 1)
{
    std::mt19937_64 rng(seed);
    SampleCheck c;
    for (int n = 0; n < pairs; ++n) {
        const Vec x = detail::random_point(f.dim, f.dom_box_radius, rng);
        const Vec y = detail::random_point(f.dim, f.dom_box_radius, rng);
        const double fx = f.eval(x), fy = f.eval(y);
        if (!std::isfinite(fx) || !std::isfinite(fy))
            continue;
        const double fm = f.eval(0.5 * (x + y));
        c.worst = std::min(c.worst, 0.5 * (fx + fy) - fm);
        ++c.samples;
    }
    return c;
}

/// Slack f(x) + f*(y) - <y, x> using the analytic conjugate.
inline SampleCheck check_fenchel_young(const ConvexFn& f, int pairs = 300, unsigned seed = 2)
{
    if (!f.conjugate)
        throw Error(ErrorCode::InvalidParameter, "Fenchel-Young check needs an analytic conjugate");
    std::mt19937_64 rng(seed);
    SampleCheck c;
    for (int n = 0; n < pairs; ++n) {
        const Vec x = detail::random_point(f.dim, f.dom_box_radius, rng);
        const Vec y = detail::random_point(f.dim, 3.0, rng);
        const double s = f.eval(x) + f.conjugate(y);
        if (!std::isfinite(s))
            continue;
        c.worst = std::min(c.worst, s - y.dot(x));
        ++c.samples;
    }
    return c;
}

/// For v = prox(w, g), (w - v)/g must be a subgradient at v: probes z near v give the
/// normalised slack f(z) - f(v) - <(w - v)/g, z - v>.
inline SampleCheck check_prox_optimality(const ConvexFn& f, int points = 100, unsigned seed = 3)
{
    if (!f.prox)
        throw Error(ErrorCode::InvalidParameter, "prox check needs a prox oracle");
    std::mt19937_64 rng(seed);
    SampleCheck c;
    for (int n = 0; n < points; ++n) {
        const Vec w = detail::random_point(f.dim, 3.0, rng);
        const double step = 0.1 + 0.9 * std::uniform_real_distribution<double>(0, 1)(rng);
        const Vec v = f.prox(w, step);
        const Vec g = (w - v) / step;
        const double fv = f.eval(v);
        for (int k = 0; k < 8; ++k) {
            const Vec z = v + detail::random_point(f.dim, 0.5, rng);
            const double fz = f.eval(z);
            if (!std::isfinite(fz))
                continue;
            c.worst = std::min(c.worst, (fz - fv - g.dot(z - v)) / (1.0 + (z - v).norm()));
        }
        ++c.samples;
    }
    return c;
}

/// Largest |f(lambda x) - lambda f(x)| over sample points and lambdas.
inline double homogeneity_defect(const ConvexFn& f, const std::vector<Vec>& points)
{
    double worst = 0.0;
    for (const Vec& x : points) {
        const double fx = f.eval(x);
        if (!std::isfinite(fx))
            continue;
        for (double lam : {0.5, 2.0, 10.0}) {
            const double fl = f.eval(lam * x);
            worst = std::max(worst, std::abs(fl - lam * fx) / (1.0 + std::abs(lam * fx)));
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------------------
// Library potentials

inline ConvexFn quadratic_fn(int dim, double curvature = 1.0)
{
    if (!(curvature > 0.0))
        throw Error(ErrorCode::InvalidParameter, "curvature must be positive");
    ConvexFn f;
    f.dim = dim;
    f.eval = [a = curvature](const Vec& x) { return 0.5 * a * x.squaredNorm(); };
    f.conjugate = [a = curvature](const Vec& y) { return 0.5 * y.squaredNorm() / a; };
    f.subgrad = [a = curvature](const Vec& x) -> Vec { return a * x; };
    f.prox = [a = curvature](const Vec& w, double g) -> Vec { return w / (1.0 + g * a); };
    f.label = "quadratic";
    return f;
}

/// Polar-set membership tolerance used by the closed-form indicators of K*.
inline constexpr double kPolarTol = 1e-9;

/// R |x|^p / p with the Euclidean norm; p = 1 is the gauge R|x|.
inline ConvexFn power_norm_fn(int dim, double p, double weight = 1.0)
{
    if (!(p >= 1.0) || !(weight > 0.0))
        throw Error(ErrorCode::InvalidParameter, "power norm needs p >= 1 and weight > 0");
    ConvexFn f;
    f.dim = dim;
    f.one_homogeneous = (p == 1.0);
    f.eval = [p, weight](const Vec& x) { return weight * std::pow(x.norm(), p) / p; };
    if (p == 1.0) {
        f.conjugate = [weight](const Vec& y) { return y.norm() <= weight * (1.0 + kPolarTol) ? 0.0 : kInf; };
    }
    else {
        const double q = p / (p - 1.0);
        f.conjugate = [q, weight](const Vec& y) {
            return weight * std::pow(y.norm() / weight, q) / q;
        };
    }
    f.subgrad = [p, weight](const Vec& x) -> Vec {
        const double n = x.norm();
        if (n == 0.0)
            return Vec::Zero(x.size());
        return weight * std::pow(n, p - 2.0) * x;
    };
    // radial equation r + g*R*r^(p-1) = |w|, solved in log r; near p = 1 use the exact
    // block soft threshold
    f.prox = [p, weight](const Vec& w, double g) -> Vec {
        const double s = w.norm();
        if (s == 0.0)
            return Vec::Zero(w.size());
        const double lam = g * weight;
        if (p < 1.0 + 1e-6) {
            return s <= lam ? Vec(Vec::Zero(w.size())) : Vec(w * (1.0 - lam / s));
        }
        if (p == 2.0)
            return w / (1.0 + lam);
        auto h = [&](double theta) { return std::exp(theta) + lam * std::exp((p - 1.0) * theta) - s; };
        const double lo = -740.0;
        if (h(lo) >= 0.0)
            return Vec::Zero(w.size());
        const double theta = bracketed_root(h, lo, std::log(s));
        return w * (std::exp(theta) / s);
    };
    f.label = "power_norm";
    return f;
}

/// R * M_K(x); conjugate is the indicator of R K*.
inline ConvexFn gauge_fn(std::shared_ptr<const GaugeBody> body, double weight = 1.0)
{
    if (!(weight > 0.0))
        throw Error(ErrorCode::InvalidParameter, "gauge weight must be positive");
    ConvexFn f;
    f.dim = body->dim;
    f.one_homogeneous = true;
    f.eval = [body, weight](const Vec& x) { return weight * gauge_eval(*body, x); };
    f.conjugate = [body, weight](const Vec& y) {
        return polar_membership(*body, y / weight, 17, kPolarTol) ? 0.0 : kInf;
    };
    f.prox = [body, weight](const Vec& w, double g) -> Vec {
        const double lam = g * weight;
        return w - lam * polar_project(*body, w / lam);
    };
    f.label = "gauge";
    return f;
}

inline ConvexFn affine_fn(const Vec& slope, double offset)
{
    ConvexFn f;
    f.dim = static_cast<int>(slope.size());
    f.eval = [slope, offset](const Vec& x) { return slope.dot(x) + offset; };
    f.conjugate = [slope, offset](const Vec& y) {
        return (y - slope).norm() <= 1e-12 * (1.0 + slope.norm()) ? -offset : kInf;
    };
    f.subgrad = [slope](const Vec&) { return slope; };
    f.prox = [slope](const Vec& w, double g) -> Vec { return w - g * slope; };
    f.label = "affine";
    return f;
}

/// Indicator of the single point c (closed convex set).
inline ConvexFn point_indicator_fn(const Vec& c)
{
    ConvexFn f;
    f.dim = static_cast<int>(c.size());
    f.eval = [c](const Vec& x) { return (x - c).norm() <= 1e-12 ? 0.0 : kInf; };
    f.conjugate = [c](const Vec& y) { return y.dot(c); };
    f.prox = [c](const Vec&, double) { return c; };
    f.label = "point_indicator";
    return f;
}

} // namespace dnlab
