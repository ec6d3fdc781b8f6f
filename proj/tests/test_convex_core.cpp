#include <dnlab/convex.hpp>
#include <dnlab/gauge.hpp>
#include <dnlab/legendre.hpp>

#include <gtest/gtest.h>

#include <memory>
#include <random>

using namespace dnlab;

namespace {

ConvexFn numeric_only(ConvexFn f)
{
    f.conjugate = nullptr;
    return f;
}

ConvexFn abs_fn() { return gauge_fn(std::make_shared<GaugeBody>(interval_body(1.0)), 1.0); }

ConvexFn two_wells()
{
    ConvexFn f;
    f.dim = 1;
    f.eval = [](const Vec& x) { return std::min(std::abs(x[0] - 1.0), std::abs(x[0] + 1.0)); };
    return f;
}

// Brute-force 1-d biconjugate on a fine grid, independent of the search engine.
double grid_biconjugate(const std::function<double(double)>& f, double x)
{
    const std::vector<double> axis = uniform_axis(6.0, 2401);
    std::vector<double> vals(axis.size());
    for (std::size_t i = 0; i < axis.size(); ++i)
        vals[i] = f(axis[i]);
    const std::vector<double> conj = discrete_conjugate_1d(axis, vals, axis);
    const std::vector<double> bi = discrete_conjugate_1d(axis, conj, {x});
    return bi[0];
}

} // namespace

TEST(Conjugate, QuadraticIsSelfConjugate)
{
    EXPECT_NEAR(conjugate_eval(numeric_only(quadratic_fn(1)), vec1(2.0)), 2.0, 1e-8);
    EXPECT_NEAR(conjugate_eval(quadratic_fn(1), vec1(2.0)), 2.0, 1e-12);
}

TEST(Conjugate, AbsoluteValueIsIndicatorOfUnitInterval)
{
    EXPECT_NEAR(conjugate_eval(numeric_only(abs_fn()), vec1(0.5)), 0.0, 1e-8);
    EXPECT_TRUE(std::isinf(conjugate_eval(numeric_only(abs_fn()), vec1(2.0))));
    EXPECT_EQ(conjugate_eval(abs_fn(), vec1(0.5)), 0.0);
    EXPECT_TRUE(std::isinf(conjugate_eval(abs_fn(), vec1(2.0))));
}

TEST(Conjugate, ThreeHalvesPower)
{
    const ConvexFn f = power_norm_fn(1, 1.5, 1.0);
    EXPECT_NEAR(conjugate_eval(numeric_only(f), vec1(1.0)), 1.0 / 3.0, 1e-8);
    EXPECT_NEAR(conjugate_eval(f, vec1(1.0)), 1.0 / 3.0, 1e-12);
}

TEST(Conjugate, RejectsNonFiniteInput)
{
    try {
        conjugate_eval(quadratic_fn(1), vec1(std::nan("")));
        FAIL();
    }
    catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonFiniteInput);
    }
}

TEST(Conjugate, FenchelYoungAndOrderReversal)
{
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const ConvexFn small = numeric_only(quadratic_fn(2, 2.0));
    const ConvexFn large = numeric_only(power_norm_fn(2, 2.0, 4.0));   // 2|x|^2 >= |x|^2
    for (int k = 0; k < 20; ++k) {
        const Vec x = vec2(u(rng), u(rng));
        const Vec y = vec2(u(rng), u(rng));
        const double fs = conjugate_eval(small, y);
        EXPECT_GE(small.eval(x) + fs, x.dot(y) - 1e-8);
        EXPECT_LE(conjugate_eval(large, y), fs + 1e-8);
    }
    EXPECT_TRUE(check_fenchel_young(power_norm_fn(2, 1.3, 0.7)).pass(1e-8));
    EXPECT_TRUE(check_fenchel_young(abs_fn()).pass(1e-8));
}

TEST(Biconjugate, ClosedConvexReproduced)
{
    EXPECT_NEAR(biconjugate_eval(numeric_only(quadratic_fn(1)), vec1(1.0)), 0.5, 1e-6);
    const ConvexFn ind = point_indicator_fn(vec1(1.0));
    EXPECT_TRUE(std::isinf(biconjugate_eval(ind, vec1(0.5))));
    EXPECT_NEAR(biconjugate_eval(ind, vec1(1.0)), 0.0, 1e-6);
}

TEST(Biconjugate, NonconvexHullAgreesWithGridOracle)
{
    const ConvexFn f = two_wells();
    const double oracle = grid_biconjugate([&](double t) { return f.eval(vec1(t)); }, 0.0);
    EXPECT_NEAR(oracle, 0.0, 1e-9);
    EXPECT_NEAR(biconjugate_eval(f, vec1(0.0)), oracle, 1e-6);
    for (double x : {-2.5, -0.4, 0.7, 1.8}) {
        const double o = grid_biconjugate([&](double t) { return f.eval(vec1(t)); }, x);
        const double b = biconjugate_eval(f, vec1(x));
        EXPECT_NEAR(b, o, 1e-4) << x;
        EXPECT_LE(b, f.eval(vec1(x)) + 1e-8);
    }
}

TEST(Gauge, Examples)
{
    const GaugeBody k = interval_body(2.0);
    EXPECT_NEAR(gauge_eval(k, vec1(3.0)), 1.5, 1e-12);
    EXPECT_EQ(gauge_eval(k, vec1(0.0)), 0.0);
    EXPECT_NEAR(gauge_eval(euclidean_ball(2), vec2(3.0, 4.0)), 5.0, 1e-12);
}

TEST(Gauge, UnboundedDirectionsHaveZeroGauge)
{
    const GaugeBody k = weighted_l1_body(vec2(1.0, 0.0));
    EXPECT_EQ(gauge_eval(k, vec2(0.0, 5.0)), 0.0);
    EXPECT_NEAR(gauge_eval(k, vec2(2.0, 5.0)), 2.0, 1e-12);
}

TEST(Gauge, BeyondScaleCapIsInfinite)
{
    GaugeBody k = interval_body(1.0);
    k.membership = [](const Vec& x) { return x[0] == 0.0; };
    EXPECT_TRUE(std::isinf(gauge_eval(k, vec1(1.0))));
}

TEST(Polar, Membership)
{
    EXPECT_TRUE(polar_membership(interval_body(2.0), vec1(0.4)));
    EXPECT_FALSE(polar_membership(interval_body(2.0), vec1(0.6)));
    EXPECT_TRUE(polar_membership(euclidean_ball(2), vec2(0.6, 0.8)));
}

TEST(Polar, NumericSupportMatchesOracle)
{
    GaugeBody k = ellipse_body(vec2(2.0, 0.5));
    GaugeBody bare = k;
    bare.support = nullptr;
    for (const Vec& y : {vec2(0.3, 0.1), vec2(-0.2, 1.5), vec2(0.45, -0.2)}) {
        EXPECT_NEAR(support_eval(bare, y), k.support(y), 1e-7);
        EXPECT_EQ(polar_membership(bare, y), polar_membership(k, y));
    }
}

TEST(Polar, ProjectionsLandInPolarSet)
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    for (const GaugeBody& k : {ellipse_body(vec2(2.0, 0.5)), box_body(vec2(1.0, 3.0)),
                               weighted_l1_body(vec2(0.5, 2.0)), euclidean_ball(2, 2.0)}) {
        for (int s = 0; s < 20; ++s) {
            const Vec z = vec2(u(rng), u(rng));
            const Vec p = k.polar_projection(z);
            EXPECT_LE(k.support(p), 1.0 + 1e-9);
            // projection optimality: <z - p, w - p> <= 0 for w in K*
            for (int t = 0; t < 10; ++t) {
                Vec w = vec2(u(rng), u(rng));
                const double h = k.support(w);
                if (h > 1.0)
                    w /= h;
                EXPECT_LE((z - p).dot(w - p), 1e-8);
            }
        }
    }
}

TEST(Gauge, BodyChecks)
{
    const BodyCheck c = check_body(ellipse_body(vec2(1.0, 2.0)));
    EXPECT_TRUE(c.contains_origin);
    EXPECT_TRUE(c.star_shaped);
    GaugeBody annulus = euclidean_ball(2, 2.0);
    annulus.membership = [](const Vec& x) { return x.norm() >= 0.5 && x.norm() <= 2.0; };
    EXPECT_FALSE(check_body(annulus).contains_origin);
    EXPECT_FALSE(check_body(annulus).star_shaped);
}

TEST(Recession, Examples)
{
    EXPECT_NEAR(recession_eval(abs_fn(), vec1(2.0), 1e6).value, 2.0, 1e-9);
    EXPECT_TRUE(std::isinf(recession_eval(numeric_only(quadratic_fn(1, 2.0)), vec1(1.0), 1e6).value));
    EXPECT_NEAR(recession_eval(affine_fn(vec1(3.0), 1.0), vec1(2.0), 1e6).value, 6.0, 1e-6);
}

TEST(Recession, GaugeIsItsOwnRecession)
{
    auto body = std::make_shared<GaugeBody>(ellipse_body(vec2(1.0, 3.0)));
    const ConvexFn g = gauge_fn(body, 1.0);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int s = 0; s < 10; ++s) {
        const Vec z = vec2(u(rng), u(rng));
        const RecessionResult r = recession_eval(g, z, 1e6);
        EXPECT_NEAR(r.value, g.eval(z), 1e-8 * (1.0 + g.eval(z)));
        EXPECT_TRUE(r.monotone);
    }
}

TEST(Recession, QuotientIsNondecreasing)
{
    const ConvexFn f = power_norm_fn(1, 1.5, 1.0);
    const RecessionResult r = recession_eval(f, vec1(1.0), 1e6);
    EXPECT_TRUE(r.monotone);
    for (std::size_t i = 1; i < r.ladder.size(); ++i)
        EXPECT_GE(r.ladder[i].second, r.ladder[i - 1].second);
}

TEST(Recession, EmptyDomainThrows)
{
    ConvexFn f;
    f.dim = 1;
    f.eval = [](const Vec&) { return kInf; };
    try {
        recession_eval(f, vec1(1.0), 10.0);
        FAIL();
    }
    catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyDomain);
    }
}

TEST(ConvexFnChecks, LibraryPotentialsPassSampledChecks)
{
    auto ellipse = std::make_shared<GaugeBody>(ellipse_body(vec2(1.0, 2.0)));
    for (const ConvexFn& f : {quadratic_fn(2), power_norm_fn(2, 1.5, 0.3), power_norm_fn(1, 1.01, 2.0),
                              gauge_fn(ellipse, 0.5), power_norm_fn(3, 3.0, 1.0)}) {
        EXPECT_TRUE(check_midpoint_convexity(f).pass(1e-9)) << f.label;
        EXPECT_TRUE(check_fenchel_young(f).pass(1e-9)) << f.label;
        EXPECT_TRUE(check_prox_optimality(f).pass(1e-7)) << f.label;
    }
    EXPECT_FALSE(check_midpoint_convexity(two_wells()).pass(1e-6));
}

TEST(ConvexFnChecks, HomogeneityDefect)
{
    const std::vector<Vec> pts = {vec1(1.0), vec1(-2.0), vec1(0.3)};
    EXPECT_LT(homogeneity_defect(abs_fn(), pts), 1e-12);
    EXPECT_GT(homogeneity_defect(quadratic_fn(1), pts), 0.1);
}

TEST(Legendre, DiscreteConjugateOfQuadratic)
{
    const std::vector<double> axis = uniform_axis(4.0, 801);
    std::vector<double> f(axis.size());
    for (std::size_t i = 0; i < axis.size(); ++i)
        f[i] = 0.5 * axis[i] * axis[i];
    const std::vector<double> c = discrete_conjugate_1d(axis, f, {-1.0, 0.0, 1.5});
    EXPECT_NEAR(c[0], 0.5, 1e-4);
    EXPECT_NEAR(c[1], 0.0, 1e-4);
    EXPECT_NEAR(c[2], 1.125, 1e-4);
    const std::vector<double> empty(axis.size(), kInf);
    EXPECT_EQ(discrete_conjugate_1d(axis, empty, {0.0})[0], -kInf);
}
