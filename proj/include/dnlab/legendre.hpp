#pragma once

// Discrete Legendre-Fenchel transforms on tensor grids (linear-time hull walk per axis).

#include "core.hpp"

#include <vector>

namespace dnlab {

/// sup_i { s_j * x_i - f_i } for every slope s_j.  x and s must be ascending; +inf
/// entries of f are ignored.  Returns -inf if f has no finite entry (empty sup).
inline std::vector<double> discrete_conjugate_1d(const std::vector<double>& x,
                                                 const std::vector<double>& f,
                                                 const std::vector<double>& s)
{
    std::vector<std::size_t> hull;
    hull.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(f[i]))
            continue;
        while (hull.size() >= 2) {
            const std::size_t a = hull[hull.size() - 2];
            const std::size_t b = hull.back();
            // drop b if it lies on or above the chord a-i
            const double lhs = (f[b] - f[a]) * (x[i] - x[a]);
            const double rhs = (f[i] - f[a]) * (x[b] - x[a]);
            if (lhs >= rhs)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(i);
    }
    std::vector<double> out(s.size(), -kInf);
    if (hull.empty())
        return out;
    std::size_t k = 0;
    for (std::size_t j = 0; j < s.size(); ++j) {
        while (k + 1 < hull.size()) {
            const std::size_t a = hull[k], b = hull[k + 1];
            const double slope = (f[b] - f[a]) / (x[b] - x[a]);
            if (slope <= s[j])
                ++k;
            else
                break;
        }
        out[j] = s[j] * x[hull[k]] - f[hull[k]];
    }
    return out;
}

/// Values of a function of two variables on the tensor grid axis x axis, row-major
/// (index i along the first variable, j along the second).
struct Grid2 {
    std::vector<double> axis;
    std::vector<double> values;

    std::size_t n() const { return axis.size(); }
    double& at(std::size_t i, std::size_t j) { return values[i * axis.size() + j]; }
    double at(std::size_t i, std::size_t j) const { return values[i * axis.size() + j]; }
};

inline std::vector<double> uniform_axis(double half_width, std::size_t points)
{
    std::vector<double> a(points);
    for (std::size_t i = 0; i < points; ++i)
        a[i] = -half_width + 2.0 * half_width * static_cast<double>(i) / (points - 1);
    return a;
}

/// Discrete conjugate of a gridded function on the same slope grid, by two 1-d passes.
inline Grid2 discrete_conjugate_2d(const Grid2& g)
{
    const std::size_t n = g.n();
    Grid2 partial{g.axis, std::vector<double>(n * n)};
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            row[j] = g.at(i, j);
        const std::vector<double> c = discrete_conjugate_1d(g.axis, row, g.axis);
        for (std::size_t j = 0; j < n; ++j)
            partial.at(i, j) = c[j];
    }
    Grid2 out{g.axis, std::vector<double>(n * n)};
    std::vector<double> col(n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i)
            col[i] = -partial.at(i, j);
        const std::vector<double> c = discrete_conjugate_1d(g.axis, col, g.axis);
        for (std::size_t i = 0; i < n; ++i)
            out.at(i, j) = c[i];
    }
    return out;
}

} // namespace dnlab
