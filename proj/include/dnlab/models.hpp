#pragma once

// Built-in models and their reference solutions.
//
//   play1d       E = k/2 (u - l)^2 + c0,   psi = R|v|
//   viscous1d    same energy,              psi = R|v|^p / p
//   oscillator   (x, m), H = k/2 (x - l)^2 + m^2/(2M) + c0, alpha = d D(x') + eps J,
//                which is eps^2 M x'' + R d|x'| + k (x - l) = 0 after eliminating m
//   skew2d       E = k/2 |u - l e1|^2 + c0, alpha = d(R|.|) + eps Q with Q the quarter rotation
//   elastoplastic_element
//                (u, v, p), H = C/2 (u - p)^2 + H/2 p^2 + v^2/(2 rho) - l u + c0,
//                alpha = d(R|p'|) + eps J on (u, v)
//   wave_surrogate
//                n-node finite-difference string with nodal dry friction, same (u, v) structure

#include "diagnostics.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dnlab {

struct ModelSpec {
    std::string name = "play1d";
    double R = 0.3;
    double k = 1.0;
    double mass = 1.0;
    double eps = 0.0;
    double p = 2.0;
    double hardening = 1.0;
    double elasticity = 1.0;
    double density = 1.0;
    int nodes = 4;               // wave_surrogate
    Load load = Load::ramp(1.0);
    Vec u0;                      // empty: zeros
    double horizon = 1.0;
    double half_width = 10.0;
};

/// The rate-independent limit of a model, restricted to its dissipative coordinates.
struct ReducedModel {
    std::vector<int> components;
    Energy energy;
    MonotoneOp op;   // 1-homogeneous
};

struct Model {
    std::string name;
    Dynamics dyn;
    Vec u0;
    StepMode mode = StepMode::prox_cyclic;
    ReducedModel reduced;
    std::string scope;   // nonempty for models that only approximate a continuum system
    /// Reference states on the given grid for `reduced.components`; empty when none exists.
    std::function<std::vector<Vec>(const std::vector<double>&)> oracle;
};

inline Load scale_load(Load l, double c)
{
    l.offset *= c;
    l.slope *= c;
    l.amplitude *= c;
    for (double& v : l.knot_v)
        v *= c;
    return l;
}

/// Scalar play operator with threshold r, evaluated at the grid times.  Turning points of
/// the load between grid nodes are inserted, which makes it exact for piecewise-monotone loads.
inline std::vector<double> play_oracle(double r, const Load& load, double u0, const std::vector<double>& grid)
{
    if (!(r >= 0.0))
        throw Error(ErrorCode::InvalidParameter, "play threshold must be nonnegative");
    std::vector<double> out;
    double u = u0;
    double prev = grid.empty() ? 0.0 : grid.front();
    for (double t : grid) {
        for (double s : load.turning_points(prev, t)) {
            const double l = load.value(s);
            u = std::clamp(u, l - r, l + r);
        }
        const double l = load.value(t);
        u = std::clamp(u, l - r, l + r);
        out.push_back(u);
        prev = t;
    }
    return out;
}

/// Sweeping process u' in -N_{l(t) dir + r B}(u) for the Euclidean ball, by catch-up
/// projections on `substeps` refinements of each grid interval.
inline std::vector<Vec> vector_play_oracle(double r, const Load& load, const Vec& dir, const Vec& u0,
                                           const std::vector<double>& grid, int substeps = 64)
{
    std::vector<Vec> out;
    Vec u = u0;
    double prev = grid.empty() ? 0.0 : grid.front();
    auto project = [&](double t) {
        const Vec c = load.value(t) * dir;
        const Vec d = u - c;
        const double n = d.norm();
        if (n > r)
            u = c + d * (r / n);
    };
    for (double t : grid) {
        for (int s = 1; s <= substeps; ++s)
            project(prev + (t - prev) * s / substeps);
        project(t);
        out.push_back(u);
        prev = t;
    }
    return out;
}

/// One-element return map with linear kinematic hardening under a prescribed stress l(t):
/// the plastic strain is the play of l/H with threshold R/H, the total strain p + l/C.
inline std::vector<Vec> return_map_oracle(double R, double C, double H, const Load& load, double p0,
                                          const std::vector<double>& grid)
{
    const std::vector<double> p = play_oracle(R / H, scale_load(load, 1.0 / H), p0, grid);
    std::vector<Vec> out;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        Vec s(2);
        s << p[i] + load.value(grid[i]) / C, p[i];
        out.push_back(s);
    }
    return out;
}

namespace detail {

inline double load_bound(const Load& l, double horizon)
{
    double m = 0.0;
    for (double t : time_samples(horizon, 2001))
        m = std::max(m, std::abs(l.value(t)));
    return m;
}

inline Mat symplectic_pairs(int n_pairs, int dim)
{
    // J (q, m) = (m, -q) on each (q_i, m_i) pair, zero on the remaining coordinates
    Mat j = Mat::Zero(dim, dim);
    for (int i = 0; i < n_pairs; ++i) {
        j(i, n_pairs + i) = 1.0;
        j(n_pairs + i, i) = -1.0;
    }
    return j;
}

inline void check_positive(const ModelSpec& s)
{
    for (double v : {s.R, s.k, s.mass, s.hardening, s.elasticity, s.density, s.horizon, s.half_width})
        if (!(v > 0.0))
            throw Error(ErrorCode::InvalidParameter, "model parameters must be positive");
    if (!(s.eps >= 0.0) || !(s.p >= 1.0))
        throw Error(ErrorCode::InvalidParameter, "model needs eps >= 0 and p >= 1");
    for (double t : time_samples(s.horizon, 257))
        if (!std::isfinite(s.load.value(t)))
            throw Error(ErrorCode::InvalidParameter, "load is not finite on [0, T]");
}

} // namespace detail

inline Model build_model(const ModelSpec& s)
{
    detail::check_positive(s);
    Model m;
    m.name = s.name;
    const Load load = s.load;
    const double R = s.R;
    auto initial = [&](int d) {
        if (s.u0.size() == 0)
            return Vec(Vec::Zero(d));
        if (s.u0.size() != d)
            throw Error(ErrorCode::InvalidParameter, "u0 has dimension " + std::to_string(s.u0.size()) +
                                                         ", model " + s.name + " needs " + std::to_string(d));
        return s.u0;
    };

    if (s.name == "play1d" || s.name == "viscous1d") {
        Energy e = tracking_energy(1, s.k, load, {}, s.half_width, 1.0, s.horizon);
        const MonotoneOp op = s.name == "play1d" ? abs_op(R) : pnorm_op(1, s.p, R);
        m.dyn = Dynamics{e, op};
        m.u0 = initial(1);
        m.reduced = ReducedModel{{0}, e, abs_op(R)};
        const double u0 = m.u0[0], r = R / s.k;
        m.oracle = [r, load, u0](const std::vector<double>& grid) {
            std::vector<Vec> out;
            for (double u : play_oracle(r, load, u0, grid))
                out.push_back(Vec::Constant(1, u));
            return out;
        };
        return m;
    }

    if (s.name == "oscillator") {
        const double k = s.k, M = s.mass;
        Energy e;
        e.dim = 2;
        e.horizon = s.horizon;
        e.floor = 1.0;
        e.eval = [=](double t, const Vec& u) {
            const double d = u[0] - load.value(t);
            return 0.5 * k * d * d + 0.5 * u[1] * u[1] / M + 1.0;
        };
        e.time_deriv = [=](double t, const Vec& u) { return -k * (u[0] - load.value(t)) * load.rate(t); };
        e.subgrad = [=](double t, const Vec& u) -> Vec {
            Vec g(2);
            g << k * (u[0] - load.value(t)), u[1] / M;
            return g;
        };
        e.hessian = [=](double, const Vec&) -> Mat { return Vec((Vec(2) << k, 1.0 / M).finished()).asDiagonal(); };
        e.box_lo = Vec::Constant(2, -s.half_width);
        e.box_hi = Vec::Constant(2, s.half_width);
        e.label = "oscillator";
        const auto body = std::make_shared<GaugeBody>(weighted_l1_body((Vec(2) << 1.0, 0.0).finished()));
        m.dyn = Dynamics{e, skew_op(gauge_op(body, R), s.eps, detail::symplectic_pairs(1, 2))};
        m.mode = StepMode::forward_backward_skew;
        m.u0 = initial(2);
        m.reduced = ReducedModel{{0}, tracking_energy(1, k, load, {}, s.half_width, 1.0, s.horizon), abs_op(R)};
        const double x0 = m.u0[0], r = R / k;
        m.oracle = [r, load, x0](const std::vector<double>& grid) {
            std::vector<Vec> out;
            for (double u : play_oracle(r, load, x0, grid))
                out.push_back(Vec::Constant(1, u));
            return out;
        };
        return m;
    }

    if (s.name == "skew2d") {
        Energy e = tracking_energy(2, s.k, load, {}, s.half_width, 1.0, s.horizon);
        const auto ball = std::make_shared<GaugeBody>(euclidean_ball(2));
        m.dyn = Dynamics{e, skew_op(gauge_op(ball, R), s.eps, quarter_rotation())};
        m.mode = StepMode::forward_backward_skew;
        m.u0 = initial(2);
        m.reduced = ReducedModel{{0, 1}, e, gauge_op(ball, R)};
        const Vec u0 = m.u0;
        const double r = R / s.k;
        m.oracle = [r, load, u0](const std::vector<double>& grid) {
            return vector_play_oracle(r, load, Vec::Unit(2, 0), u0, grid);
        };
        return m;
    }

    if (s.name == "elastoplastic_element") {
        const double C = s.elasticity, H = s.hardening, rho = s.density;
        const double lmax = detail::load_bound(load, s.horizon);
        const double c0 = 1.0 + 0.5 * lmax * lmax * (1.0 / C + 1.0 / H);
        Energy e;
        e.dim = 3;
        e.horizon = s.horizon;
        e.floor = 1.0;
        e.eval = [=](double t, const Vec& x) {
            const double el = x[0] - x[2];
            return 0.5 * C * el * el + 0.5 * H * x[2] * x[2] + 0.5 * x[1] * x[1] / rho - load.value(t) * x[0] + c0;
        };
        e.time_deriv = [=](double t, const Vec& x) { return -load.rate(t) * x[0]; };
        e.subgrad = [=](double t, const Vec& x) -> Vec {
            Vec g(3);
            g << C * (x[0] - x[2]) - load.value(t), x[1] / rho, -C * (x[0] - x[2]) + H * x[2];
            return g;
        };
        e.hessian = [=](double, const Vec&) -> Mat {
            Mat h = Mat::Zero(3, 3);
            h(0, 0) = C;
            h(0, 2) = h(2, 0) = -C;
            h(2, 2) = C + H;
            h(1, 1) = 1.0 / rho;
            return h;
        };
        e.box_lo = Vec::Constant(3, -s.half_width);
        e.box_hi = Vec::Constant(3, s.half_width);
        e.label = "elastoplastic_element";
        const auto body = std::make_shared<GaugeBody>(weighted_l1_body((Vec(3) << 0.0, 0.0, 1.0).finished()));
        m.dyn = Dynamics{e, skew_op(gauge_op(body, R), s.eps, detail::symplectic_pairs(1, 3))};
        m.mode = StepMode::forward_backward_skew;
        m.u0 = initial(3);
        // quasistatic reduction in p: min over u of the stored energy is H/2 (p - l/H)^2 + const
        m.reduced = ReducedModel{{2}, tracking_energy(1, H, scale_load(load, 1.0 / H), {}, s.half_width, 1.0, s.horizon),
                                 abs_op(R)};
        const double p0 = m.u0[2];
        m.oracle = [=](const std::vector<double>& grid) {
            std::vector<Vec> out;
            for (const Vec& up : return_map_oracle(R, C, H, load, p0, grid))
                out.push_back(up.tail(1));
            return out;
        };
        return m;
    }

    if (s.name == "wave_surrogate") {
        const int n = s.nodes;
        if (n < 2 || n > 8)
            throw Error(ErrorCode::InvalidParameter, "wave_surrogate needs 2 to 8 nodes");
        const double h = 1.0 / (n + 1);
        Mat a = Mat::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            a(i, i) = 2.0 / h;
            if (i + 1 < n)
                a(i, i + 1) = a(i + 1, i) = -1.0 / h;
        }
        const double lmax = detail::load_bound(load, s.horizon);
        const Vec ones = Vec::Ones(n);
        const double c0 = 1.0 + 0.5 * lmax * lmax * h * h * ones.dot(a.ldlt().solve(ones));
        Energy e;
        e.dim = 2 * n;
        e.horizon = s.horizon;
        e.floor = 1.0;
        e.eval = [=](double t, const Vec& x) {
            const Vec u = x.head(n), v = x.tail(n);
            return 0.5 * u.dot(a * u) + 0.5 * v.squaredNorm() / (h * s.density) - h * load.value(t) * u.sum() + c0;
        };
        e.time_deriv = [=](double t, const Vec& x) { return -h * load.rate(t) * x.head(n).sum(); };
        e.subgrad = [=](double t, const Vec& x) -> Vec {
            Vec g(2 * n);
            g.head(n) = a * x.head(n) - h * load.value(t) * Vec::Ones(n);
            g.tail(n) = x.tail(n) / (h * s.density);
            return g;
        };
        e.hessian = [=](double, const Vec&) -> Mat {
            Mat hm = Mat::Zero(2 * n, 2 * n);
            hm.topLeftCorner(n, n) = a;
            hm.bottomRightCorner(n, n) = Mat::Identity(n, n) / (h * s.density);
            return hm;
        };
        e.box_lo = Vec::Constant(2 * n, -s.half_width);
        e.box_hi = Vec::Constant(2 * n, s.half_width);
        e.label = "wave_surrogate";
        m.scope = "finite-dimensional surrogate";
        Vec w = Vec::Zero(2 * n);
        w.head(n).setConstant(h);
        const auto body = std::make_shared<GaugeBody>(weighted_l1_body(w));
        m.dyn = Dynamics{e, skew_op(gauge_op(body, R), s.eps, detail::symplectic_pairs(n, 2 * n))};
        m.mode = StepMode::forward_backward_skew;
        m.u0 = initial(2 * n);
        Energy re;
        re.dim = n;
        re.horizon = s.horizon;
        re.floor = 1.0;
        re.eval = [=](double t, const Vec& u) { return 0.5 * u.dot(a * u) - h * load.value(t) * u.sum() + c0; };
        re.time_deriv = [=](double t, const Vec& u) { return -h * load.rate(t) * u.sum(); };
        re.subgrad = [=](double t, const Vec& u) -> Vec { return a * u - h * load.value(t) * Vec::Ones(n); };
        re.hessian = [=](double, const Vec&) -> Mat { return a; };
        re.box_lo = Vec::Constant(n, -s.half_width);
        re.box_hi = Vec::Constant(n, s.half_width);
        std::vector<int> comps;
        for (int i = 0; i < n; ++i)
            comps.push_back(i);
        m.reduced = ReducedModel{comps, re,
                                 gauge_op(std::make_shared<GaugeBody>(weighted_l1_body(Vec::Constant(n, h))), R)};
        return m;   // no closed-form reference
    }

    throw Error(ErrorCode::InvalidParameter, "unknown model " + s.name);
}

/// The trajectory restricted to the dissipative coordinates, with selections from the
/// reduced energy.
inline Trajectory reduce_trajectory(const Trajectory& tr, const ReducedModel& red)
{
    std::vector<Vec> states;
    for (const Vec& u : tr.u) {
        Vec r(red.components.size());
        for (std::size_t i = 0; i < red.components.size(); ++i)
            r[static_cast<Eigen::Index>(i)] = u[red.components[i]];
        states.push_back(r);
    }
    Trajectory out = trajectory_from_states(tr.tau, states, red.energy);
    out.jump = tr.jump;
    return out;
}

struct ModelRun {
    Model model;
    StepperConfig cfg;
    Trajectory traj;
    EnergyLedger ledger;
    BvReport bv;
    LocalSolutionReport local;
    std::optional<double> identity_residual;   // when no jumps were flagged
    std::optional<double> sup_error;           // against the reference solution
    CoercivityReport coercivity;               // reported, not enforced
    std::vector<Certificate> certificates;

    bool pass() const
    {
        for (const Certificate& c : certificates)
            if (!c.pass)
                return false;
        return true;
    }
};

struct RunOptions {
    double bv_tol = 1e-6;
    double stability_tol = 1e-6;
    double identity_scale = 10.0;   // identity PASS threshold identity_scale * tau * (1 + E_0)
    /// Certify the rate-independent limit conditions.  automatic: only when the operator is
    /// already rate-independent, i.e. 1-homogeneous without a skew part (eps = 0).
    enum class LocalCheck { automatic, on, off } local_check = LocalCheck::automatic;
};

inline bool wants_local_check(const MonotoneOp& op, RunOptions::LocalCheck mode)
{
    if (mode != RunOptions::LocalCheck::automatic)
        return mode == RunOptions::LocalCheck::on;
    if (op.kind == OpKind::skew_perturbed)
        return op.eps == 0.0 && op.base->one_homogeneous();
    return op.one_homogeneous();
}

inline double sup_distance(const Trajectory& tr, const std::vector<int>& comps, const std::vector<Vec>& ref)
{
    double err = 0.0;
    for (std::size_t k = 0; k < tr.size() && k < ref.size(); ++k)
        for (std::size_t i = 0; i < comps.size(); ++i)
            err = std::max(err, std::abs(tr.u[k][comps[i]] - ref[k][static_cast<Eigen::Index>(i)]));
    return err;
}

inline ModelRun run_model(const ModelSpec& spec, StepperConfig cfg, const RunOptions& o = {})
{
    ModelRun run{build_model(spec), {}, {}, {}, {}, {}, {}, {}, {}, {}};
    cfg.mode = run.model.mode;
    cfg.t_end = spec.horizon;
    run.cfg = cfg;
    run.traj = integrate(run.model.dyn, run.model.u0, cfg);
    const Energy& e = run.model.dyn.energy;
    const MonotoneOp& op = run.model.dyn.op;
    run.ledger = build_ledger(run.traj, op, e);
    run.bv = bv_energy_inequality_check(run.traj, op, e, o.bv_tol);
    run.certificates.push_back(run.bv.cert);

    bool jumps = false;
    for (char j : run.traj.jump)
        jumps = jumps || j;
    if (!jumps) {
        run.identity_residual = run.ledger.max_abs_residual();
        Certificate c;
        c.name = "energy_identity";
        c.worst_margin = -*run.identity_residual;
        double worst = 0.0;
        for (std::size_t k = 0; k < run.ledger.residual.size(); ++k)
            if (std::abs(run.ledger.residual[k]) >= worst) {
                worst = std::abs(run.ledger.residual[k]);
                c.location = run.ledger.t[k];
            }
        c.pass = *run.identity_residual <= o.identity_scale * cfg.tau * (1.0 + run.ledger.stored.front());
        run.certificates.push_back(c);
    }

    if (wants_local_check(op, o.local_check)) {
        const Trajectory red = reduce_trajectory(run.traj, run.model.reduced);
        run.local = local_solution_check(red, run.model.reduced.op, run.model.reduced.energy, o.stability_tol);
        run.certificates.push_back({"local_stability", run.local.stability_margin <= o.stability_tol,
                                    0.0 - run.local.stability_margin, run.local.stability_location});
        run.certificates.push_back({"var_psi_energy_inequality", run.local.worst_var_margin >= -o.stability_tol,
                                    run.local.worst_var_margin, run.local.var_location});
    }
    if (run.model.oracle)
        run.sup_error = sup_distance(run.traj, run.model.reduced.components, run.model.oracle(run.traj.t));
    const MonotoneOp& base = op.kind == OpKind::skew_perturbed ? *op.base : op;
    run.coercivity = coercivity_estimate(base, base.one_homogeneous() ? 1.0 : spec.p);
    return run;
}

} // namespace dnlab
