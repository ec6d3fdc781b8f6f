#pragma once

// Derivative-free global/local search used by every numeric sup and inf in the library.
//
// A search seeds a box around `center` on a regular grid (quasi-random beyond three
// dimensions), refines the best seeds with a pattern search whose poll set is
// re-rotated before each step reduction, and grows the box tenfold while the maximiser
// sits on its boundary and the value keeps rising.  Objectives may return -inf to mark
// points outside their effective domain.

#include "core.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <vector>

namespace dnlab {

using Objective = std::function<double(const Vec&)>;

struct SearchOptions {
    double radius = 10.0;
    Vec center;                   // empty means the origin
    int seeds_per_axis = 33;
    int max_grid_dims = 3;        // beyond this, seeds_per_axis^3 Halton points
    int refine_starts = 3;
    double step_tol = 1e-12;      // relative to max(1, |x|_inf)
    long max_evaluations = 2'000'000;
    double value_cap = kValueCap;
    double max_radius = 1e13;
    bool expand = true;
    double plateau_tol = 1e-10;
    int rotations = 2;            // rotated poll sets tried before a step is halved
    std::vector<Vec> extra_seeds;
};

struct SearchResult {
    double value = -kInf;
    Vec arg;
    bool unbounded = false;
    bool converged = true;
    long evaluations = 0;
    double radius = 0.0;
};

namespace detail {

inline double halton(long index, int base)
{
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * static_cast<double>(index % base);
        index /= base;
    }
    return r;
}

inline constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

inline std::vector<Vec> seed_points(int dim, const Vec& center, double radius, int per_axis,
                                    int max_grid_dims)
{
    std::vector<Vec> seeds;
    per_axis = std::max(per_axis, 1);
    if (dim <= max_grid_dims) {
        long total = 1;
        for (int i = 0; i < dim; ++i)
            total *= per_axis;
        seeds.reserve(static_cast<std::size_t>(total));
        for (long n = 0; n < total; ++n) {
            Vec p(dim);
            long rem = n;
            for (int i = 0; i < dim; ++i) {
                const long k = rem % per_axis;
                rem /= per_axis;
                const double frac = per_axis == 1 ? 0.5 : static_cast<double>(k) / (per_axis - 1);
                p[i] = center[i] - radius + 2.0 * radius * frac;
            }
            seeds.push_back(std::move(p));
        }
    }
    else {
        long total = 1;
        for (int i = 0; i < 3; ++i)
            total *= per_axis;
        seeds.reserve(static_cast<std::size_t>(total));
        for (long n = 1; n <= total; ++n) {
            Vec p(dim);
            for (int i = 0; i < dim; ++i)
                p[i] = center[i] - radius + 2.0 * radius * halton(n, kPrimes[i % 16]);
            seeds.push_back(std::move(p));
        }
    }
    return seeds;
}

inline std::vector<Vec> poll_directions(int dim)
{
    std::vector<Vec> dirs;
    for (int i = 0; i < dim; ++i) {
        Vec e = Vec::Zero(dim);
        e[i] = 1.0;
        dirs.push_back(e);
        dirs.push_back(-e);
    }
    if (dim <= 6) {
        const double s = 1.0 / std::sqrt(2.0);
        for (int i = 0; i < dim; ++i)
            for (int j = i + 1; j < dim; ++j)
                for (int si : {1, -1})
                    for (int sj : {1, -1}) {
                        Vec e = Vec::Zero(dim);
                        e[i] = si * s;
                        e[j] = sj * s;
                        dirs.push_back(e);
                    }
    }
    return dirs;
}

inline Mat random_rotation(int dim, std::mt19937_64& rng)
{
    std::normal_distribution<double> gauss(0.0, 1.0);
    Mat a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            a(i, j) = gauss(rng);
    Eigen::HouseholderQR<Mat> qr(a);
    return qr.householderQ();
}

struct Box {
    Vec center;
    double radius;
    bool contains(const Vec& x) const { return (x - center).lpNorm<Eigen::Infinity>() <= radius; }
};

class Counter {
public:
    Counter(const Objective& f, long budget) : f_(f), budget_(budget) {}
    double operator()(const Vec& x)
    {
        ++count_;
        const double v = f_(x);
        return std::isnan(v) ? -kInf : v;
    }
    long count() const { return count_; }
    bool exhausted() const { return count_ >= budget_; }

private:
    const Objective& f_;
    long budget_;
    long count_ = 0;
};

/// Pattern search ascent confined to a box.  Returns false if the evaluation budget ran out.
inline bool pattern_ascent(Counter& f, const Box& box, Vec& x, double& fx, double step,
                           double step_tol, int rotations, std::mt19937_64& rng)
{
    const int dim = static_cast<int>(x.size());
    const std::vector<Vec> base = poll_directions(dim);
    std::vector<Vec> dirs = base;
    std::size_t last_success = 0;
    int rotations_tried = 0;
    const double max_step = box.radius;
    while (true) {
        if (f.exhausted())
            return false;
        const double min_step = step_tol * std::max(1.0, x.lpNorm<Eigen::Infinity>());
        if (step < min_step)
            return true;
        bool improved = false;
        for (std::size_t n = 0; n < dirs.size(); ++n) {
            const std::size_t k = (last_success + n) % dirs.size();
            Vec y = x + step * dirs[k];
            if (!box.contains(y))
                continue;
            const double fy = f(y);
            if (fy > fx) {
                x = std::move(y);
                fx = fy;
                improved = true;
                last_success = k;
                break;
            }
        }
        if (std::isinf(fx) && fx > 0)
            return true;
        if (improved) {
            step = std::min(2.0 * step, max_step);
            continue;
        }
        if (dim >= 2 && rotations_tried < rotations) {
            const Mat rot = random_rotation(dim, rng);
            dirs.clear();
            for (const Vec& d : base)
                dirs.push_back(rot * d);
            ++rotations_tried;
            continue;
        }
        dirs = base;
        rotations_tried = 0;
        step *= 0.5;
    }
}

} // namespace detail

/// Global-then-local maximisation of `objective` over R^dim.
inline SearchResult maximize(const Objective& objective, int dim, const SearchOptions& opts = {})
{
    if (dim <= 0)
        throw Error(ErrorCode::InvalidParameter, "search dimension must be positive");
    const Vec center = opts.center.size() == dim ? opts.center : Vec::Zero(dim);
    detail::Counter f(objective, opts.max_evaluations);
    std::mt19937_64 rng(0x5eed1234ULL + static_cast<unsigned long long>(dim));

    SearchResult out;
    double radius = opts.radius;
    double previous = -kInf;
    Vec carried;
    for (int expansion = 0;; ++expansion) {
        const detail::Box box{center, radius};
        std::vector<Vec> seeds = detail::seed_points(dim, center, radius, opts.seeds_per_axis,
                                                     opts.max_grid_dims);
        seeds.push_back(center);
        for (const Vec& s : opts.extra_seeds)
            if (s.size() == dim && box.contains(s))
                seeds.push_back(s);
        if (carried.size() == dim)
            seeds.push_back(carried);

        std::vector<std::pair<double, std::size_t>> ranked;
        ranked.reserve(seeds.size());
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            const double v = f(seeds[i]);
            if (v > -kInf)
                ranked.emplace_back(v, i);
            if (std::isinf(v) && v > 0) {
                out = {kInf, seeds[i], true, true, f.count(), radius};
                return out;
            }
        }
        if (ranked.empty())
            throw Error(ErrorCode::EmptyDomain, "objective is -inf on every seed");
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });

        const double spacing =
            opts.seeds_per_axis > 1 ? 2.0 * radius / (opts.seeds_per_axis - 1) : radius;
        SearchResult best;
        best.radius = radius;
        const int starts = std::min<int>(opts.refine_starts, static_cast<int>(ranked.size()));
        for (int s = 0; s < starts; ++s) {
            Vec x = seeds[ranked[static_cast<std::size_t>(s)].second];
            double fx = ranked[static_cast<std::size_t>(s)].first;
            const bool ok = detail::pattern_ascent(f, box, x, fx, 0.5 * spacing, opts.step_tol,
                                                    opts.rotations, rng);
            if (!ok)
                throw Error(ErrorCode::OptimizerDiverged, "search exhausted its evaluation budget");
            if (fx > best.value) {
                best.value = fx;
                best.arg = x;
            }
        }
        best.evaluations = f.count();

        if (best.value >= opts.value_cap) {
            best.value = kInf;
            best.unbounded = true;
            return best;
        }
        if (!opts.expand)
            return best;
        const double dist = (best.arg - center).lpNorm<Eigen::Infinity>();
        const bool at_boundary = dist >= radius * (1.0 - 1e-6);
        if (!at_boundary)
            return best;
        if (expansion > 0 &&
            best.value <= previous + opts.plateau_tol * (1.0 + std::abs(previous)))
            return best;
        if (radius * 10.0 > opts.max_radius) {
            best.value = kInf;
            best.unbounded = true;
            return best;
        }
        previous = best.value;
        carried = best.arg;
        radius *= 10.0;
    }
}

inline SearchResult minimize(const Objective& objective, int dim, const SearchOptions& opts = {})
{
    SearchOptions o = opts;
    o.value_cap = kInf;
    SearchResult r = maximize([&](const Vec& x) { return -objective(x); }, dim, o);
    r.value = -r.value;
    return r;
}

} // namespace dnlab
