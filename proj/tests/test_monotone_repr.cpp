#include <dnlab/representatives.hpp>

#include <gtest/gtest.h>

#include <memory>
#include <random>

using namespace dnlab;

namespace {

ReprOptions numeric() { ReprOptions o; o.closed_form = false; return o; }

void expect_same_extended(double a, double b, double tol)
{
    if (std::isinf(a) || std::isinf(b))
        EXPECT_EQ(a, b);
    else
        EXPECT_NEAR(a, b, tol);
}

MonotoneOp euclid_norm_op(int dim, double weight = 1.0)
{
    return gauge_op(std::make_shared<GaugeBody>(euclidean_ball(dim)), weight);
}

// Independent oracle: Fitzpatrick sup over a dense 1-d graph sample.
double brute_fitzpatrick_1d(const std::function<std::vector<std::pair<double, double>>()>& graph,
                            double x, double y)
{
    double best = -kInf;
    for (const auto& [x0, y0] : graph())
        best = std::max(best, y * x0 + y0 * (x - x0));
    return best;
}

std::vector<std::pair<double, double>> pnorm_graph_1d(double p, double r)
{
    std::vector<std::pair<double, double>> g;
    for (int i = -40000; i <= 40000; ++i) {
        const double x0 = i * 1e-4 * 2.0;
        g.emplace_back(x0, r * std::pow(std::abs(x0), p - 1.0) * (x0 > 0 ? 1.0 : (x0 < 0 ? -1.0 : 0.0)));
    }
    // steep part near the origin
    for (int i = 1; i <= 4000; ++i) {
        const double y0 = r * i / 4000.0;
        const double x0 = std::pow(y0 / r, 1.0 / (p - 1.0));
        g.emplace_back(x0, y0);
        g.emplace_back(-x0, -y0);
    }
    return g;
}

} // namespace

TEST(Pairing, Examples)
{
    EXPECT_EQ(pairing_eval(vec1(1), vec1(1)), 1.0);
    EXPECT_EQ(pairing_eval(vec2(1, 0), vec2(0, 1)), 0.0);
    EXPECT_EQ(pairing_eval(vec2(2, 1), vec2(3, -1)), 5.0);
}

TEST(MakeOperator, PnormBranches)
{
    const MonotoneOp a = pnorm_op(1, 2.0, 1.0);
    EXPECT_NEAR(select(a, vec1(3.0))[0], 3.0, 1e-15);
    const MonotoneOp b = pnorm_op(1, 1.0, 0.3);
    EXPECT_TRUE(in_graph(b, vec1(0.0), vec1(0.2)));
    EXPECT_FALSE(in_graph(b, vec1(0.0), vec1(0.4)));
}

TEST(MakeOperator, SkewPerturbedSelection)
{
    const MonotoneOp s = skew_op(euclid_norm_op(2), 0.1, quarter_rotation());
    const Vec y = select(s, vec2(1.0, 0.0));
    EXPECT_NEAR(y[0], 1.0, 1e-12);
    EXPECT_NEAR(y[1], 0.1, 1e-12);
    EXPECT_FALSE(s.cyclic);
    EXPECT_EQ((s.matrix + s.matrix.transpose()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(MakeOperator, InvalidParameters)
{
    auto code_of = [](auto&& f) {
        try {
            f();
        }
        catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::IOFailure;
    };
    EXPECT_EQ(code_of([] { pnorm_op(1, 0.5, 1.0); }), ErrorCode::InvalidParameter);
    EXPECT_EQ(code_of([] { pnorm_op(1, 2.0, 0.0); }), ErrorCode::InvalidParameter);
    Mat j(2, 2);
    j << 0, 1, -0.9, 0;
    EXPECT_EQ(code_of([&] { skew_op(euclid_norm_op(2), 0.1, j); }), ErrorCode::InvalidParameter);
    Mat neg = -Mat::Identity(2, 2);
    EXPECT_EQ(code_of([&] { linear_op(neg); }), ErrorCode::InvalidParameter);
}

TEST(MakeOperator, ConstructedOperatorsAreMonotone)
{
    Mat a(2, 2);
    a << 1, 2, -2, 0.5;
    const std::vector<MonotoneOp> ops = {
        identity_op(1), pnorm_op(2, 1.5, 0.3), pnorm_op(1, 1.0, 2.0), abs_op(0.3), linear_op(a),
        skew_op(euclid_norm_op(2), 0.5, quarter_rotation()),
        gauge_op(std::make_shared<GaugeBody>(ellipse_body(vec2(1.0, 2.0))), 1.5)};
    for (const MonotoneOp& op : ops) {
        EXPECT_GE(check_monotone(op).worst, -1e-12) << op.label;
        if (op.contains_origin_pair) {
            EXPECT_TRUE(graph_membership_test(op, Vec::Zero(op.dim), Vec::Zero(op.dim), 1e-9).member);
        }
    }
}

TEST(Fitzpatrick, IdentityExamples)
{
    const MonotoneOp id = identity_op(1);
    EXPECT_NEAR(fitzpatrick_eval(id, vec1(1), vec1(0)), 0.25, 1e-15);
    EXPECT_NEAR(fitzpatrick_eval(id, vec1(1), vec1(1)), 1.0, 1e-15);
    EXPECT_NEAR(fitzpatrick_eval(id, vec1(1), vec1(0), numeric()), 0.25, 1e-8);
    EXPECT_NEAR(fitzpatrick_eval(id, vec1(1), vec1(1), numeric()), 1.0, 1e-8);
}

TEST(Fitzpatrick, AbsoluteValueIsBipotential)
{
    const MonotoneOp op = abs_op(1.0);
    EXPECT_NEAR(fitzpatrick_eval(op, vec1(2), vec1(0.5)), 2.0, 1e-12);
    EXPECT_NEAR(fitzpatrick_eval(op, vec1(2), vec1(0.5), numeric()), 2.0, 1e-8);
    EXPECT_TRUE(std::isinf(fitzpatrick_eval(op, vec1(2), vec1(1.5))));
    EXPECT_TRUE(fitzpatrick_sup(op, vec1(2), vec1(1.5), numeric()).unbounded);
}

TEST(Fitzpatrick, PnormNumericMatchesBruteForce)
{
    for (double p : {1.5, 1.1, 3.0}) {
        const MonotoneOp op = pnorm_op(1, p, 0.7);
        const auto graph = [&] { return pnorm_graph_1d(p, 0.7); };
        for (const auto& [x, y] : std::vector<std::pair<double, double>>{{1, 0.5}, {-0.3, 0.9}, {2, -1}, {0, 0.2}}) {
            const double num = fitzpatrick_eval(op, vec1(x), vec1(y));
            const double brute = brute_fitzpatrick_1d(graph, x, y);
            EXPECT_GE(num, brute - 1e-7) << p << " " << x << " " << y;
            EXPECT_NEAR(num, brute, 1e-4 * (1.0 + std::abs(brute))) << p << " " << x << " " << y;
        }
    }
}

TEST(Fitzpatrick, QuadraticClosedFormMatchesNumeric)
{
    const MonotoneOp op = pnorm_op(2, 2.0, 1.7);
    const Vec x = vec2(0.3, -1.0), y = vec2(1.2, 0.4);
    EXPECT_NEAR(fitzpatrick_eval(op, x, y), fitzpatrick_eval(op, x, y, numeric()), 1e-7);
}

TEST(Fitzpatrick, SkewClosedFormMatchesNumeric)
{
    Mat a(2, 2);
    a << 1, 2, -2, 0.5;
    const MonotoneOp lin = linear_op(a);
    const MonotoneOp sk = skew_op(pnorm_op(2, 2.0, 1.0), 0.8, quarter_rotation());
    for (const MonotoneOp* op : {&lin, &sk}) {
        const Vec x = vec2(0.5, 1.0), y = vec2(-0.2, 0.7);
        EXPECT_NEAR(fitzpatrick_eval(*op, x, y), fitzpatrick_eval(*op, x, y, numeric()), 1e-6);
    }
}

TEST(Fitzpatrick, SampledGraphGivesLowerBound)
{
    std::vector<GraphPair> pairs;
    for (int i = -20; i <= 20; ++i)
        pairs.emplace_back(vec1(i * 0.1), vec1(i * 0.1));
    const MonotoneOp s = sampled_op(1, pairs);
    const MonotoneOp id = identity_op(1);
    for (double x : {-1.0, 0.3, 1.5})
        for (double y : {-0.5, 0.0, 0.8})
            EXPECT_LE(fitzpatrick_eval(s, vec1(x), vec1(y)), fitzpatrick_eval(id, vec1(x), vec1(y)) + 1e-12);
    try {
        fitzpatrick_eval(sampled_op(1, {}), vec1(0), vec1(0));
        FAIL();
    }
    catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::GraphEmpty);
    }
}

TEST(Penot, Examples)
{
    const MonotoneOp id = identity_op(1);
    EXPECT_NEAR(penot_eval(id, vec1(1), vec1(1)), 1.0, 1e-12);
    EXPECT_TRUE(std::isinf(penot_eval(id, vec1(1), vec1(0))));
    EXPECT_TRUE(std::isinf(penot_eval(id, vec1(1), vec1(0), numeric())));
    EXPECT_NEAR(penot_eval(id, vec1(1), vec1(1), numeric()), 1.0, 1e-6);
    EXPECT_NEAR(penot_eval(abs_op(1.0), vec1(2), vec1(0.5)), 2.0, 1e-12);
    EXPECT_NEAR(penot_eval(abs_op(1.0), vec1(2), vec1(0.5), numeric()), 2.0, 1e-6);
}

TEST(Penot, DimensionLimit)
{
    try {
        penot_eval(pnorm_op(4, 1.5, 1.0), Vec::Ones(4), Vec::Ones(4));
        FAIL();
    }
    catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DimensionTooLarge);
    }
}

TEST(Bipotential, Examples)
{
    EXPECT_NEAR(bipotential_eval(quadratic_fn(1), vec1(1), vec1(0)), 0.5, 1e-15);
    EXPECT_NEAR(bipotential_eval(gauge_fn(std::make_shared<GaugeBody>(interval_body(1.0))), vec1(2), vec1(0.5)),
                2.0, 1e-12);
    EXPECT_NEAR(bipotential_eval(quadratic_fn(1), vec1(1), vec1(1)), 1.0, 1e-15);
}

TEST(SelfDual, Examples)
{
    const MonotoneOp id = identity_op(1);
    EXPECT_NEAR(selfdual_bw_eval(id, vec1(1), vec1(1)), 1.0, 1e-6);
    EXPECT_NEAR(selfdual_bw_eval(abs_op(0.5), vec1(0), vec1(0)), 0.0, 1e-6);
    const double v = selfdual_bw_eval(id, vec1(1), vec1(0));
    EXPECT_GE(v, 0.25 - 1e-6);
    EXPECT_LE(v, 0.5 + 1e-6);
    try {
        selfdual_bw_eval(identity_op(3), Vec::Zero(3), Vec::Zero(3));
        FAIL();
    }
    catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DimensionTooLarge);
    }
}

TEST(SelfDual, GridAgreesWithPointwise)
{
    const MonotoneOp id = identity_op(1);
    BwGridOptions go;
    go.points = 901;
    const BwGrid grid = selfdual_bw_grid(id, go);
    for (const auto& [x, y] : std::vector<std::pair<double, double>>{{1, 0}, {0.5, -0.7}, {-1.2, 0.4}})
        EXPECT_NEAR(grid.value(x, y), selfdual_bw_eval(id, vec1(x), vec1(y)), 1e-3);
}

TEST(SelfDual, IdentityResidualSmall)
{
    std::vector<std::pair<double, double>> pts;
    for (double x : {-1.0, -0.3, 0.4, 1.0})
        for (double y : {-0.8, 0.0, 0.6})
            pts.emplace_back(x, y);
    const SelfDualityReport r = selfdual_residual(identity_op(1), pts);
    EXPECT_LE(r.worst, 1e-3);
}

TEST(Membership, Examples)
{
    const MonotoneOp id = identity_op(1);
    const MembershipResult a = graph_membership_test(id, vec1(1), vec1(1), 1e-6);
    EXPECT_TRUE(a.member);
    EXPECT_NEAR(a.residual, 0.0, 1e-15);
    const MembershipResult b = graph_membership_test(id, vec1(1), vec1(0), 1e-6);
    EXPECT_FALSE(b.member);
    EXPECT_NEAR(b.residual, 0.25, 1e-15);
    EXPECT_TRUE(graph_membership_test(abs_op(0.3), vec1(0.7), vec1(0.3), 1e-6).member);
}

TEST(Recession, Examples)
{
    EXPECT_NEAR(fitz_recession_eval(abs_op(1.0), vec1(2), vec1(0)), 2.0, 1e-12);
    EXPECT_TRUE(std::isinf(fitz_recession_eval(abs_op(1.0), vec1(1), vec1(0.5))));
    EXPECT_TRUE(std::isinf(fitz_recession_eval(identity_op(1), vec1(1), vec1(0))));
    FitzRecessionOptions o;
    o.closed_form = false;
    EXPECT_NEAR(fitz_recession_eval(abs_op(1.0), vec1(2), vec1(0), o), 2.0, 1e-8);
    EXPECT_TRUE(std::isinf(fitz_recession_eval(identity_op(1), vec1(1), vec1(0), o)));
}

TEST(Invariants, FloorOrderingAndEquality)
{
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const MonotoneOp gauge = abs_op(0.7);
    const ConvexFn gpsi = potential(gauge);
    const MonotoneOp quad = pnorm_op(1, 2.0, 1.3);
    const ConvexFn qpsi = potential(quad);
    for (int s = 0; s < 30; ++s) {
        const Vec x = vec1(u(rng)), y = vec1(u(rng));
        const double pi = x.dot(y);
        for (const auto* pr : {&gauge, &quad}) {
            const ConvexFn& psi = pr == &gauge ? gpsi : qpsi;
            const double f = fitzpatrick_eval(*pr, x, y);
            const double b = bipotential_eval(psi, x, y);
            const double r = penot_eval(*pr, x, y);
            EXPECT_GE(f, pi - 1e-9);
            EXPECT_LE(f, b + 1e-9);
            EXPECT_LE(b, r + 1e-9);
            EXPECT_GE(f, -1e-12);   // 0 in alpha(0)
        }
        // one-homogeneous collapse
        expect_same_extended(fitzpatrick_eval(gauge, x, y), bipotential_eval(gpsi, x, y), 1e-9);
        expect_same_extended(fitzpatrick_eval(gauge, x, y), penot_eval(gauge, x, y), 1e-9);
    }
    // equality on the graph
    for (double x : {-1.5, 0.4, 2.0}) {
        const Vec xv = vec1(x), yv = select(quad, xv);
        const double pi = xv.dot(yv);
        EXPECT_NEAR(fitzpatrick_eval(quad, xv, yv), pi, 1e-9);
        EXPECT_NEAR(penot_eval(quad, xv, yv), pi, 1e-9);
        EXPECT_NEAR(bipotential_eval(qpsi, xv, yv), pi, 1e-9);
        EXPECT_NEAR(selfdual_bw_eval(quad, xv, yv), pi, 1e-5);
    }
    // strict chain at identity (1, 0)
    const MonotoneOp id = identity_op(1);
    EXPECT_LT(fitzpatrick_eval(id, vec1(1), vec1(0)), bipotential_eval(quadratic_fn(1), vec1(1), vec1(0)));
    EXPECT_TRUE(std::isinf(penot_eval(id, vec1(1), vec1(0))));
}

TEST(Coercivity, PnormConstants)
{
    const CoercivityReport r = coercivity_estimate(pnorm_op(1, 1.5, 1.0), 1.5);
    EXPECT_GT(r.c, 0.0);
    EXPECT_NEAR(r.q, 3.0, 1e-12);
}
