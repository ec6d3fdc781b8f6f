#include <dnlab/stepper.hpp>

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

using namespace dnlab;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

double viscous_exact(double t) { return t - 1.0 + std::exp(-t); }

double viscous_sup_error(double tau)
{
    const Dynamics m{tracking_energy(1, 1.0, Load::ramp(1.0)), identity_op()};
    StepperConfig cfg;
    cfg.tau = tau;
    const Trajectory tr = integrate(m, v1(0.0), cfg);
    double err = 0.0;
    for (std::size_t k = 0; k < tr.size(); ++k)
        err = std::max(err, std::abs(tr.u[k][0] - viscous_exact(tr.t[k])));
    return err;
}

} // namespace

TEST(CyclicStep, PlaySoftThreshold)
{
    const Energy e = tracking_energy(1, 1.0, Load::constant(1.0));
    const StepResult s = implicit_step_cyclic(e, potential(abs_op(0.3)), v1(0.0), 1.0, 1.0);
    EXPECT_NEAR(s.u_next[0], 0.7, 1e-12);
    EXPECT_NEAR(s.xi_next[0], -0.3, 1e-12);
}

TEST(CyclicStep, ViscousLinearSolve)
{
    const Energy e = tracking_energy(1, 1.0, Load::constant(1.0));
    const StepResult s = implicit_step_cyclic(e, potential(identity_op()), v1(0.0), 0.5, 0.5);
    EXPECT_NEAR(s.u_next[0], 1.0 / 3.0, 1e-12);
}

TEST(CyclicStep, LoadAtStateStaysPut)
{
    const Energy e = tracking_energy(1, 1.0, Load::constant(0.4));
    for (const MonotoneOp& op : {abs_op(0.3), identity_op(), pnorm_op(1, 1.5, 0.3)}) {
        const StepResult s = implicit_step_cyclic(e, potential(op), v1(0.4), 0.1, 0.1);
        EXPECT_NEAR(s.u_next[0], 0.4, 1e-14);
    }
}

TEST(CyclicStep, InvalidInputs)
{
    const Energy e = tracking_energy(1, 1.0, Load::constant(1.0));
    EXPECT_THROW(implicit_step_cyclic(e, potential(abs_op(0.3)), v1(0.0), 1.0, 0.0), Error);
    ConvexFn noprox = potential(abs_op(0.3));
    noprox.prox = nullptr;
    EXPECT_THROW(implicit_step_cyclic(e, noprox, v1(0.0), 1.0, 1.0), Error);
}

TEST(CyclicStep, InnerSolveFailureIsReported)
{
    const Energy e = tracking_energy(1, 1.0, Load::constant(1.0));
    StepperConfig cfg;
    cfg.max_inner_iters = 0;
    try {
        implicit_step_cyclic(e, potential(pnorm_op(1, 1.5)), v1(0.0), 1.0, 1.0, cfg);
        FAIL();
    }
    catch (const Error& err) {
        EXPECT_EQ(err.code(), ErrorCode::InnerSolveFailed);
    }
}

TEST(SkewStep, ZeroEpsMatchesCyclic)
{
    const Energy e = tracking_energy(1, 1.0, Load::constant(1.0));
    const MonotoneOp op = skew_op(abs_op(0.3), 0.0, Mat::Zero(1, 1));
    const StepResult s = implicit_step_skew(e, op, v1(0.0), 1.0, 1.0);
    EXPECT_NEAR(s.u_next[0], 0.7, 1e-12);
    EXPECT_NEAR(s.xi_next[0], -0.3, 1e-12);
    EXPECT_THROW(implicit_step_skew(e, abs_op(0.3), v1(0.0), 1.0, 1.0), Error);
}

TEST(SkewStep, EquilibriumStaysPut)
{
    const Energy e = tracking_energy(2, 1.0, Load::constant(0.2));
    const auto ball = std::make_shared<GaugeBody>(euclidean_ball(2));
    const MonotoneOp op = skew_op(gauge_op(ball, 0.3), 0.1, quarter_rotation());
    const Vec u = Vec::Unit(2, 0) * 0.2;
    const StepResult s = implicit_step_skew(e, op, u, 0.1, 0.1);
    EXPECT_LT((s.u_next - u).norm(), 1e-14);
}

TEST(SkewStep, MatchesGridMinimisationOfResidual)
{
    // R^2 play with a 0.1 rotation, one step from rest under a ramp load
    const double R = 0.3, eps = 0.1, tau = 0.1;
    const Energy e = tracking_energy(2, 1.0, Load::ramp(10.0));
    const auto ball = std::make_shared<GaugeBody>(euclidean_ball(2));
    const Mat j = quarter_rotation();
    const MonotoneOp op = skew_op(gauge_op(ball, R), eps, j);
    const Vec u0 = Vec::Zero(2);
    const StepResult s = implicit_step_skew(e, op, u0, tau, tau);

    // residual of the inclusion for v != 0: |R v/|v| + eps J v + grad E(u0 + tau v)|
    auto residual = [&](const Vec& v) {
        return (R * v / v.norm() + eps * (j * v) + e.subgrad(tau, u0 + tau * v)).norm();
    };
    Vec best = Vec::Constant(2, 1.0);
    double h = 0.1;
    for (int level = 0; level < 7; ++level) {
        const Vec c = best;
        double bv = residual(best);
        for (int a = -100; a <= 100; ++a)
            for (int b = -100; b <= 100; ++b) {
                Vec v = c + h * Vec((Vec(2) << a, b).finished());
                if (v.norm() == 0.0)
                    continue;
                const double r = residual(v);
                if (r < bv) {
                    bv = r;
                    best = v;
                }
            }
        h *= 0.05;
    }
    EXPECT_LT(residual(best), 1e-8);
    EXPECT_LT((s.rate - best).norm(), 1e-5);
    EXPECT_GT(s.rate.norm(), 1.0);
}

TEST(Integrate, PlayTerminalState)
{
    const Dynamics m{tracking_energy(1, 1.0, Load::ramp(1.0)), abs_op(0.3)};
    StepperConfig cfg;
    const Trajectory tr = integrate(m, v1(0.0), cfg);
    ASSERT_EQ(tr.size(), 1001u);
    EXPECT_NEAR(tr.u.back()[0], 0.7, 2e-3);
    for (std::size_t k = 1; k < tr.size(); ++k) {
        EXPECT_NEAR(tr.u[k][0], std::max(0.0, tr.t[k] - 0.3), 2e-3);
        EXPECT_LE(std::abs(tr.xi[k][0]), 0.3 + 1e-9);
        EXPECT_LE(tr.inclusion_residual[k], 1e-6);
        EXPECT_EQ(tr.jump[k], 0);
    }
}

TEST(Integrate, ViscousTerminalStateAndFirstOrder)
{
    const Dynamics m{tracking_energy(1, 1.0, Load::ramp(1.0)), identity_op()};
    StepperConfig cfg;
    EXPECT_NEAR(integrate(m, v1(0.0), cfg).u.back()[0], viscous_exact(1.0), 1e-3);
    const double e1 = viscous_sup_error(1e-2), e2 = viscous_sup_error(5e-3), e3 = viscous_sup_error(2.5e-3);
    EXPECT_GE(e1 / e2, 1.7);
    EXPECT_LE(e1 / e2, 2.3);
    EXPECT_GE(e2 / e3, 1.7);
    EXPECT_LE(e2 / e3, 2.3);
}

TEST(Integrate, ZeroLoadAtMinimiserIsConstant)
{
    const Dynamics m{tracking_energy(2, 1.0, Load::constant(0.0)), pnorm_op(2, 1.5, 0.3)};
    StepperConfig cfg;
    cfg.tau = 1e-2;
    const Trajectory tr = integrate(m, Vec::Zero(2), cfg);
    for (const Vec& u : tr.u)
        EXPECT_EQ(u.norm(), 0.0);
}

TEST(Integrate, DeterministicAndDissipative)
{
    const Dynamics m{tracking_energy(1, 2.0, Load::sine(1.0, 3.0)), pnorm_op(1, 1.2, 0.3)};
    StepperConfig cfg;
    cfg.tau = 5e-3;
    const Trajectory a = integrate(m, v1(0.0), cfg);
    const Trajectory b = integrate(m, v1(0.0), cfg);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a.u[k][0], b.u[k][0]);
        EXPECT_EQ(a.xi[k][0], b.xi[k][0]);
    }
    // autonomous load: stored energy never increases
    const Dynamics relax{tracking_energy(1, 1.0, Load::constant(1.0)), pnorm_op(1, 1.2, 0.3)};
    const Trajectory r = integrate(relax, v1(-0.5), cfg);
    for (std::size_t k = 1; k < r.size(); ++k)
        EXPECT_LE(relax.energy.eval(r.t[k], r.u[k]), relax.energy.eval(r.t[k - 1], r.u[k - 1]) + 1e-12);
}

TEST(Integrate, InvalidConfigurations)
{
    const Dynamics m{tracking_energy(1, 1.0, Load::ramp(1.0), {}, 1.0), abs_op(0.3)};
    StepperConfig cfg;
    cfg.tau = 0.0;
    EXPECT_THROW(integrate(m, v1(0.0), cfg), Error);
    cfg = {};
    EXPECT_THROW(integrate(m, v1(5.0), cfg), Error);
    cfg.t_end = 3.0;   // load drags the state out of the unit box
    try {
        integrate(m, v1(0.0), cfg);
        FAIL();
    }
    catch (const Error& err) {
        EXPECT_EQ(err.code(), ErrorCode::DomainExit);
    }
    cfg = {};
    cfg.mode = StepMode::forward_backward_skew;
    EXPECT_THROW(integrate(m, v1(0.0), cfg), Error);
}

TEST(RateDecomposition, SmoothAndInsertedJump)
{
    const Dynamics m{tracking_energy(1, 1.0, Load::ramp(1.0)), identity_op()};
    StepperConfig cfg;
    cfg.tau = 1e-2;
    const RateDecomposition smooth = rate_decomposition(integrate(m, v1(0.0), cfg));
    EXPECT_TRUE(smooth.jumps.empty());
    EXPECT_EQ(smooth.ac_rates.size(), 100u);

    std::vector<Vec> states;
    for (int k = 0; k <= 100; ++k)
        states.push_back(v1(0.001 * k + (k >= 50 ? 0.4 : 0.0)));
    const Trajectory tr = trajectory_from_states(1e-2, states, m.energy);
    const RateDecomposition d = rate_decomposition(tr);
    ASSERT_EQ(d.jumps.size(), 1u);
    EXPECT_DOUBLE_EQ(d.jumps[0].first, 0.5);
    EXPECT_NEAR(d.jumps[0].second[0], 0.401, 1e-12);
}

TEST(Integrate, JumpFlagOnSnapThrough)
{
    // a load step makes the state jump by about 0.7 in a single step
    const Dynamics m{tracking_energy(1, 1.0, Load::piecewise({0.0, 0.5, 0.501}, {0.0, 0.0, 1.0})), abs_op(0.3)};
    StepperConfig cfg;
    const Trajectory tr = integrate(m, v1(0.0), cfg);
    int flags = 0;
    for (char f : tr.jump)
        flags += f;
    EXPECT_EQ(flags, 1);
    EXPECT_NEAR(tr.u.back()[0], 0.7, 1e-9);
    // a smooth run raises no flags
    const Dynamics smooth{tracking_energy(1, 1.0, Load::sine(1.0)), abs_op(0.3)};
    for (char f : integrate(smooth, v1(0.0), cfg).jump)
        EXPECT_EQ(f, 0);
}

TEST(TrajectoryFile, RoundTripAndHeader)
{
    const Dynamics m{tracking_energy(2, 1.0, Load::ramp(1.0)), pnorm_op(2, 1.5, 0.3)};
    StepperConfig cfg;
    cfg.tau = 0.05;
    const Trajectory tr = integrate(m, Vec::Zero(2), cfg);
    EXPECT_EQ(trajectory_header(2), "t,u_0,u_1,xi_0,xi_1,rate_0,rate_1,jump_flag");
    const std::string path = (std::filesystem::temp_directory_path() / "dnlab_traj_roundtrip.csv").string();
    write_trajectory_csv(path, tr);
    const Trajectory back = read_trajectory_csv(path);
    std::remove(path.c_str());
    ASSERT_EQ(back.size(), tr.size());
    EXPECT_EQ(back.dim, 2);
    for (std::size_t k = 0; k < tr.size(); ++k) {
        EXPECT_EQ(back.t[k], tr.t[k]);
        EXPECT_EQ(back.u[k], tr.u[k]);
        EXPECT_EQ(back.xi[k], tr.xi[k]);
    }
    EXPECT_THROW(read_trajectory_csv("/nonexistent/dir/x.csv"), Error);
}
