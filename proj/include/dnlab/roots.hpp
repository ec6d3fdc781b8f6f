#pragma once

#include "core.hpp"

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <cstdint>
#include <functional>

namespace dnlab {

/// Root of a continuous g on [lo, hi] with g(lo) <= 0 <= g(hi); endpoints are returned when
/// g vanishes there.
inline double bracketed_root(const std::function<double(double)>& g, double lo, double hi)
{
    const double glo = g(lo);
    if (glo >= 0.0)
        return lo;
    const double ghi = g(hi);
    if (ghi <= 0.0)
        return hi;
    std::uintmax_t iters = 300;
    const auto r = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi,
                                                     boost::math::tools::eps_tolerance<double>(52), iters);
    return 0.5 * (r.first + r.second);
}

} // namespace dnlab
