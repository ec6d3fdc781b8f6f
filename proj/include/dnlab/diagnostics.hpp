#pragma once

// Energy bookkeeping along discrete trajectories: the absolutely continuous energy identity,
// the BV energy inequality with a recession charge for jumps, the psi-variation and the
// local-solution conditions of rate-independent limits.

#include "representatives.hpp"
#include "stepper.hpp"

#include <fstream>
#include <string>
#include <vector>

namespace dnlab {

/// frozen_state: power_k = E(t_k, u_{k-1}) - E(t_{k-1}, u_{k-1}), the exact work of the load
/// at the state held fixed during the step.  left_endpoint: tau dE/dt(t_{k-1}, u_{k-1}).
enum class PowerQuadrature { frozen_state, left_endpoint };

struct LedgerOptions {
    PowerQuadrature quadrature = PowerQuadrature::frozen_state;
    double sandwich_tol = 1e-9;   // accept psi(v) + psi*(y) as f(v, y) when within this of <v, y>
};

/// f_alpha(v, y).  Closed forms where available; for potentials, the Fenchel-Young sandwich
/// <v,y> <= f <= psi(v) + psi*(y) when it pins f down; otherwise the numeric supremum.
inline double dissipation_density(const MonotoneOp& op, const Vec& v, const Vec& y, double sandwich_tol = 1e-9)
{
    if (op.kind == OpKind::skew_perturbed)
        return dissipation_density(*op.base, v, Vec(y - op.eps * (op.matrix * v)), sandwich_tol);
    if (op.kind == OpKind::subdiff_gauge) {
        // dual points within rounding of R K* are snapped onto it
        const Vec yp = op.weight * polar_project(*op.body, y / op.weight);
        if ((y - yp).norm() <= 1e-12 * (1.0 + y.norm()))
            return op.weight * gauge_eval(*op.body, v);
    }
    if (detail::has_closed_fitzpatrick(op))
        return fitzpatrick_eval(op, v, y);
    if (op.cyclic && op.kind != OpKind::sampled) {
        const ConvexFn psi = potential(op);
        if (psi.conjugate) {
            const double pi = v.dot(y);
            const double hi = psi.eval(v) + psi.conjugate(y);
            if (hi - pi <= sandwich_tol * (1.0 + std::abs(pi)))
                return hi;
        }
    }
    return fitzpatrick_eval(op, v, y);
}

/// Charge of a jump h: f_alpha^infinity(h, 0).
inline double singular_charge(const MonotoneOp& op, const Vec& h)
{
    return fitz_recession_eval(op, h, Vec::Zero(h.size()));
}

inline double step_power(const Energy& e, const Trajectory& tr, std::size_t k, PowerQuadrature q)
{
    const Vec& u = tr.u[k - 1];
    if (q == PowerQuadrature::frozen_state)
        return e.eval(tr.t[k], u) - e.eval(tr.t[k - 1], u);
    return (tr.t[k] - tr.t[k - 1]) * e.time_deriv(tr.t[k - 1], u);
}

/// Copy of `tr` with jump flags set by the rate rule |v_k| > threshold / sqrt(tau).
inline Trajectory flag_jumps(Trajectory tr, double threshold = 1.0)
{
    const double bar = threshold / std::sqrt(tr.tau);
    for (std::size_t k = 1; k < tr.size(); ++k)
        tr.jump[k] = tr.rate[k].norm() > bar ? 1 : 0;
    return tr;
}

/// Per-step entries; index 0 holds the initial state with zero increments.
struct EnergyLedger {
    std::vector<double> t;
    std::vector<double> stored;      // E(t_k, u_k)
    std::vector<double> diss_ac;     // tau f(v_k, -xi_k) on unflagged steps
    std::vector<double> diss_sing;   // f^infinity(u_k - u_{k-1}, 0) on flagged steps
    std::vector<double> power;
    std::vector<double> residual;    // cumulative: E_k + sum diss - E_0 - sum power

    double max_abs_residual() const
    {
        double m = 0.0;
        for (double r : residual)
            m = std::max(m, std::abs(r));
        return m;
    }
};

inline EnergyLedger build_ledger(const Trajectory& tr, const MonotoneOp& op, const Energy& e,
                                 const LedgerOptions& o = {})
{
    EnergyLedger L;
    const double e0 = e.eval(tr.t[0], tr.u[0]);
    double diss = 0.0, work = 0.0;
    for (std::size_t k = 0; k < tr.size(); ++k) {
        L.t.push_back(tr.t[k]);
        L.stored.push_back(e.eval(tr.t[k], tr.u[k]));
        if (k == 0) {
            L.diss_ac.push_back(0.0);
            L.diss_sing.push_back(0.0);
            L.power.push_back(0.0);
            L.residual.push_back(0.0);
            continue;
        }
        const double tau = tr.t[k] - tr.t[k - 1];
        double ac = 0.0, sing = 0.0;
        if (tr.jump[k])
            sing = singular_charge(op, tr.u[k] - tr.u[k - 1]);
        else
            ac = tau * dissipation_density(op, tr.rate[k], -tr.xi[k], o.sandwich_tol);
        const double pw = step_power(e, tr, k, o.quadrature);
        diss += ac + sing;
        work += pw;
        L.diss_ac.push_back(ac);
        L.diss_sing.push_back(sing);
        L.power.push_back(pw);
        L.residual.push_back(L.stored.back() + diss - e0 - work);
    }
    return L;
}

/// sum over unflagged steps of tau f_alpha(v_k, -xi_k).
inline double dissipation_integral(const Trajectory& tr, const MonotoneOp& op, double sandwich_tol = 1e-9)
{
    double s = 0.0;
    for (std::size_t k = 1; k < tr.size(); ++k)
        if (!tr.jump[k])
            s += (tr.t[k] - tr.t[k - 1]) * dissipation_density(op, tr.rate[k], -tr.xi[k], sandwich_tol);
    return s;
}

/// max_k |r_k| for trajectories without flagged jumps.
inline double energy_identity_residual(const Trajectory& tr, const MonotoneOp& op, const Energy& e,
                                       const LedgerOptions& o = {})
{
    for (std::size_t k = 1; k < tr.size(); ++k)
        if (tr.jump[k])
            throw Error(ErrorCode::JumpPresent,
                        "jump flagged at t = " + std::to_string(tr.t[k]) + "; use bv_energy_inequality_check");
    return build_ledger(tr, op, e, o).max_abs_residual();
}

struct Certificate {
    std::string name;
    bool pass = true;
    double worst_margin = 0.0;
    double location = 0.0;    // time of the worst margin
};

struct BvReport {
    std::vector<double> margins;   // E_0 + sum power - E_k - sum diss_ac - sum diss_sing
    double singular_total = 0.0;
    Certificate cert;
};

inline BvReport bv_energy_inequality_check(const Trajectory& tr, const MonotoneOp& op, const Energy& e,
                                           double tol = 1e-6, const LedgerOptions& o = {})
{
    const EnergyLedger L = build_ledger(tr, op, e, o);
    BvReport r;
    r.cert.name = "bv_energy_inequality";
    r.cert.worst_margin = kInf;
    for (std::size_t k = 0; k < L.t.size(); ++k) {
        r.singular_total += L.diss_sing[k];
        const double m = 0.0 - L.residual[k];
        r.margins.push_back(m);
        if (m < r.cert.worst_margin) {
            r.cert.worst_margin = m;
            r.cert.location = L.t[k];
        }
    }
    r.cert.pass = r.cert.worst_margin >= -tol;
    return r;
}

/// sum_k psi(u_k - u_{k-1}) for a positively 1-homogeneous psi.
inline double var_psi_eval(const Trajectory& tr, const ConvexFn& psi)
{
    std::vector<Vec> probes;
    for (std::size_t k = 1; k < tr.size(); ++k)
        probes.push_back(tr.u[k] - tr.u[k - 1]);
    for (int i = 0; i < tr.dim; ++i)
        probes.push_back(Vec::Unit(tr.dim, i));
    if (homogeneity_defect(psi, probes) > 1e-8)
        throw Error(ErrorCode::NotHomogeneous, "psi is not positively 1-homogeneous");
    double s = 0.0;
    for (std::size_t k = 1; k < tr.size(); ++k)
        s += psi.eval(tr.u[k] - tr.u[k - 1]);
    return s;
}

struct LocalSolutionReport {
    double stability_margin = -kInf;        // max_k M_{R K*}(-xi_k) - 1
    double stability_location = 0.0;
    std::vector<double> var_margins;        // E_0 + sum power - E_k - Var_psi(u; [0, t_k])
    double worst_var_margin = kInf;
    double var_location = 0.0;
    bool pass = false;
};

/// Local stability -xi_k in R K* and the psi-variation energy inequality, for a
/// 1-homogeneous dissipation (gauge, or the norm potential with p = 1).
inline LocalSolutionReport local_solution_check(const Trajectory& tr, const MonotoneOp& op, const Energy& e,
                                                double tol = 1e-6, const LedgerOptions& o = {})
{
    if (!op.one_homogeneous())
        throw Error(ErrorCode::NotHomogeneous, "local solutions need a 1-homogeneous dissipation");
    auto polar_gauge = [&](const Vec& y) {
        if (op.kind == OpKind::subdiff_gauge)
            return support_eval(*op.body, y) / op.weight;
        return y.norm() / op.weight;
    };
    const ConvexFn psi = potential(op);
    LocalSolutionReport r;
    const double e0 = e.eval(tr.t[0], tr.u[0]);
    double work = 0.0, var = 0.0;
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const double s = polar_gauge(-tr.xi[k]) - 1.0;
        if (s > r.stability_margin) {
            r.stability_margin = s;
            r.stability_location = tr.t[k];
        }
        if (k > 0) {
            work += step_power(e, tr, k, o.quadrature);
            var += psi.eval(tr.u[k] - tr.u[k - 1]);
        }
        const double m = e0 + work - e.eval(tr.t[k], tr.u[k]) - var;
        r.var_margins.push_back(m);
        if (m < r.worst_var_margin) {
            r.worst_var_margin = m;
            r.var_location = tr.t[k];
        }
    }
    r.pass = r.stability_margin <= tol && r.worst_var_margin >= -tol;
    return r;
}

struct PointwiseReport {
    std::vector<double> residuals;     // per unflagged step k >= 1
    double l1_mean = 0.0;
    double max_abs = 0.0;
    int chain_violations = 0;          // steps with dE/tau < <xi, v> + dE/dt - tol_k
    bool chain_pass = true;
};

/// residual_k = (E_k - E_{k-1})/tau + f(v_k, -xi_k) - dE/dt(t_k, u_k), and the one-sided
/// chain-rule check with tol_k = chain_tol_scale * tau * (1 + |v_k|^2).
inline PointwiseReport pointwise_identity_check(const Trajectory& tr, const MonotoneOp& op, const Energy& e,
                                                double chain_tol_scale = 10.0)
{
    PointwiseReport r;
    for (std::size_t k = 1; k < tr.size(); ++k) {
        if (tr.jump[k])
            continue;
        const double tau = tr.t[k] - tr.t[k - 1];
        const double de = (e.eval(tr.t[k], tr.u[k]) - e.eval(tr.t[k - 1], tr.u[k - 1])) / tau;
        const double dt = e.time_deriv(tr.t[k], tr.u[k]);
        const Vec& v = tr.rate[k];
        const double res = de + dissipation_density(op, v, -tr.xi[k]) - dt;
        r.residuals.push_back(res);
        r.l1_mean += std::abs(res);
        r.max_abs = std::max(r.max_abs, std::abs(res));
        const double tol_k = chain_tol_scale * tau * (1.0 + v.squaredNorm());
        if (de < tr.xi[k].dot(v) + dt - tol_k)
            ++r.chain_violations;
    }
    if (!r.residuals.empty())
        r.l1_mean /= static_cast<double>(r.residuals.size());
    r.chain_pass = r.chain_violations == 0;
    return r;
}

// Ledger file -----------------------------------------------------------------------------

inline void write_ledger_csv(const std::string& path, const Trajectory& tr, const EnergyLedger& L)
{
    std::ofstream f(path);
    if (!f)
        throw Error(ErrorCode::IOFailure, "cannot write " + path);
    f << trajectory_header(tr.dim) << ",stored,diss_ac,diss_sing,power,residual\n";
    for (std::size_t k = 0; k < tr.size(); ++k)
        f << trajectory_row(tr, k) << ',' << format_double(L.stored[k]) << ',' << format_double(L.diss_ac[k])
          << ',' << format_double(L.diss_sing[k]) << ',' << format_double(L.power[k]) << ','
          << format_double(L.residual[k]) << '\n';
    if (!f)
        throw Error(ErrorCode::IOFailure, "write failed for " + path);
}

} // namespace dnlab
