#pragma once

// Finite certificates for convergence of operator families: the Fitzpatrick liminf
// inequality over shrinking balls, and nearest-point distances between graphs.

#include "representatives.hpp"

#include <cmath>
#include <functional>
#include <future>
#include <random>
#include <vector>

namespace dnlab {

using OperatorFamily = std::function<MonotoneOp(int n)>;

/// n = 2, 4, 8, ... up to and including n_max.
inline std::vector<int> dyadic_ladder(int n_max)
{
    if (n_max < 2)
        throw Error(ErrorCode::InvalidParameter, "n_max must be >= 2");
    std::vector<int> ns;
    for (int n = 2; n < n_max; n *= 2)
        ns.push_back(n);
    ns.push_back(n_max);
    return ns;
}

struct LiminfOptions {
    double tol = 1e-6;
    double r0 = 0.5;               // ball radius r0 / n
    double slack = -1.0;           // tol_n = tol + slack (1 + ln n)^log_power / n; negative: 2 (1 + |x| + |y|)
    double log_power = 0.0;        // 1 for families converging at log(n) / n, e.g. p_n = 1 + 1/n
    int random_samples = 4;        // in addition to the centre and the 4d axis points
    unsigned seed = 17;
};

struct LiminfPoint {
    Vec x;
    Vec y;
    double target = 0.0;                 // f_alpha(x, y)
    std::vector<int> ns;
    std::vector<double> ball_min;        // min of f_{alpha_n} over the ball
    std::vector<double> margins;         // ball_min - target (or ball_min when target = +inf)
    std::vector<double> tolerances;      // tol_n
    double margin = 0.0;                 // at the largest n
    bool pass = false;
};

struct LiminfReport {
    std::vector<LiminfPoint> points;
    bool pass = true;
};

namespace detail {

inline std::vector<Vec> ball_samples(const Vec& c, double r, int random_samples, std::mt19937_64& rng)
{
    std::vector<Vec> out = {c};
    for (Eigen::Index i = 0; i < c.size(); ++i)
        for (double s : {1.0, -1.0}) {
            Vec p = c;
            p[i] += s * r;
            out.push_back(p);
            p[i] = c[i] + 0.5 * s * r;
            out.push_back(p);
        }
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < random_samples; ++k) {
        Vec d(c.size());
        for (Eigen::Index i = 0; i < c.size(); ++i)
            d[i] = g(rng);
        out.push_back(c + d * (r * std::pow(u(rng), 1.0 / c.size()) / d.norm()));
    }
    return out;
}

inline LiminfPoint liminf_point(const MonotoneOp& limit,
                                const std::vector<MonotoneOp>& members, const std::vector<int>& ns,
                                const Vec& x, const Vec& y, const LiminfOptions& o, unsigned seed)
{
    LiminfPoint pt;
    pt.x = x;
    pt.y = y;
    pt.ns = ns;
    pt.target = fitzpatrick_eval(limit, x, y);
    const double slack = o.slack >= 0.0 ? o.slack : 2.0 * (1.0 + x.norm() + y.norm());
    std::mt19937_64 rng(seed);
    const int d = limit.dim;
    for (std::size_t k = 0; k < ns.size(); ++k) {
        const int n = ns[k];
        const double r = o.r0 / n;
        const std::vector<Vec> ball = ball_samples(concat(x, y), r, o.random_samples, rng);
        double m = kInf;
        for (const Vec& w : ball)
            m = std::min(m, fitzpatrick_eval(members[k], w.head(d), w.tail(d)));
        pt.ball_min.push_back(m);
        pt.tolerances.push_back(o.tol + slack * std::pow(1.0 + std::log(static_cast<double>(n)), o.log_power) / n);
        pt.margins.push_back(std::isinf(pt.target) ? m : m - pt.target);
    }
    pt.margin = pt.margins.back();
    if (std::isinf(pt.target)) {
        // an infinite target needs values that do not decrease along the ladder
        pt.pass = true;
        for (std::size_t k = 1; k < pt.ball_min.size(); ++k)
            if (pt.ball_min[k] < pt.ball_min[k - 1] - o.tol * (1.0 + std::abs(pt.ball_min[k - 1])))
                pt.pass = false;
    }
    else {
        pt.pass = pt.margins.back() >= -pt.tolerances.back();
    }
    return pt;
}

} // namespace detail

/// Checks f_alpha(x, y) <= liminf_n min over B((x, y), r0/n) of f_{alpha_n} at each point.
inline LiminfReport gamma_liminf_probe(const OperatorFamily& family, const MonotoneOp& limit,
                                       const std::vector<GraphPair>& points, int n_max,
                                       const LiminfOptions& o = {})
{
    const std::vector<int> ns = dyadic_ladder(n_max);
    std::vector<MonotoneOp> members;
    for (int n : ns)
        members.push_back(family(n));
    std::vector<std::future<LiminfPoint>> jobs;
    for (std::size_t i = 0; i < points.size(); ++i)
        jobs.push_back(std::async(std::launch::async, [&, i] {
            return detail::liminf_point(limit, members, ns, points[i].first, points[i].second, o,
                                        o.seed + static_cast<unsigned>(i));
        }));
    LiminfReport rep;
    for (auto& j : jobs) {
        rep.points.push_back(j.get());
        rep.pass = rep.pass && rep.points.back().pass;
    }
    return rep;
}

struct GraphDistancePoint {
    Vec x;
    Vec y;
    std::vector<int> ns;
    std::vector<double> distances;        // nearest-point distance to graph(alpha_n)
    std::vector<double> lift_distances;   // explicit lift (x, y + eps_n J x), skew families only
    double decay_rate = 0.0;              // fitted exponent: distance ~ n^-rate
    double lift_decay_rate = 0.0;
};

struct GraphConvergenceReport {
    std::vector<GraphDistancePoint> points;
};

/// Least-squares slope of -log(value) against log(n), over positive finite values.
inline double fit_decay_rate(const std::vector<int>& ns, const std::vector<double>& values)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = 0; i < ns.size() && i < values.size(); ++i) {
        if (!(values[i] > 1e-14) || !std::isfinite(values[i]))
            continue;
        const double lx = std::log(static_cast<double>(ns[i]));
        const double ly = std::log(values[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    if (m < 2)
        return kInf;
    const double den = m * sxx - sx * sx;
    return den == 0.0 ? 0.0 : -(m * sxy - sx * sy) / den;
}

struct NearestOptions {
    double search_radius = 20.0;
    int seeds_per_axis = 17;
};

/// Distance from (x, y) to graph(op), by minimisation over the graph parametrisation.
/// Equal distances keep the earliest seed, so results are deterministic.
inline double graph_distance(const MonotoneOp& op, const Vec& x, const Vec& y, const NearestOptions& o = {})
{
    if (op.kind == OpKind::sampled) {
        if (op.samples.empty())
            throw Error(ErrorCode::GraphEmpty, "sampled operator has no pairs");
        double best = kInf;
        for (const auto& [a, b] : op.samples)
            best = std::min(best, std::sqrt((a - x).squaredNorm() + (b - y).squaredNorm()));
        return best;
    }
    auto dist = [&](const Vec& z) {
        const auto [a, b] = graph_point(op, z);
        return std::sqrt((a - x).squaredNorm() + (b - y).squaredNorm());
    };
    SearchOptions s;
    s.center = graph_coordinate(op, x, y);
    s.radius = 2.0 + x.norm() + y.norm();
    s.seeds_per_axis = o.seeds_per_axis;
    s.expand = false;
    s.step_tol = 1e-13;
    s.extra_seeds = {graph_coordinate(op, x, select(op, x))};
    const SearchResult r = minimize(dist, op.dim, s);
    if (!(r.value <= o.search_radius))
        throw Error(ErrorCode::SearchFailed, "no graph point within the search radius");
    return r.value;
}

/// Distances from on-graph pairs of `limit` to the graphs of the family members.
inline GraphConvergenceReport graph_convergence_probe(const OperatorFamily& family, const MonotoneOp& limit,
                                                      const std::vector<GraphPair>& pairs, int n_max,
                                                      const NearestOptions& o = {})
{
    for (const auto& [x, y] : pairs)
        if (!graph_membership_test(limit, x, y, 1e-6).member)
            throw Error(ErrorCode::InvalidParameter, "sample pair is not on the limit graph");
    const std::vector<int> ns = dyadic_ladder(n_max);
    std::vector<MonotoneOp> members;
    for (int n : ns)
        members.push_back(family(n));
    std::vector<std::future<GraphDistancePoint>> jobs;
    for (const auto& pr : pairs)
        jobs.push_back(std::async(std::launch::async, [&, pr] {
            GraphDistancePoint pt;
            pt.x = pr.first;
            pt.y = pr.second;
            pt.ns = ns;
            for (const MonotoneOp& m : members) {
                pt.distances.push_back(graph_distance(m, pt.x, pt.y, o));
                if (m.kind == OpKind::skew_perturbed)
                    pt.lift_distances.push_back((m.eps * (m.matrix * pt.x)).norm());
            }
            pt.decay_rate = fit_decay_rate(ns, pt.distances);
            if (!pt.lift_distances.empty())
                pt.lift_decay_rate = fit_decay_rate(ns, pt.lift_distances);
            return pt;
        }));
    GraphConvergenceReport rep;
    for (auto& j : jobs)
        rep.points.push_back(j.get());
    return rep;
}

} // namespace dnlab
