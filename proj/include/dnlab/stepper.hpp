#pragma once

// Implicit Euler for alpha(u') + dE_t(u) -> 0.  Each step solves for the rate v
//
//     0 in d psi(v) + c J v + grad E(t_next, u_prev + tau v)
//
// (c = 0 for cyclic alpha = d psi, c = eps for alpha = d psi + eps J) as a zero of the
// forward-backward residual r(v) = v - prox_{g psi}(v - g S(v)), by semismooth Newton with
// a residual line search and forward-backward (Picard) fallback steps.

#include "convex.hpp"
#include "energy.hpp"
#include "representatives.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace dnlab {

enum class StepMode { prox_cyclic, forward_backward_skew };

struct StepperConfig {
    double tau = 1e-3;
    double t_end = 1.0;
    double inclusion_tol = 1e-6;
    int max_inner_iters = 100;
    StepMode mode = StepMode::prox_cyclic;
    double fb_stepsize = 0.0;          // 0: 1 / Lipschitz estimate of the smooth part
    double solve_tol = 1e-12;
    double jump_threshold = 1.0;       // rate rule |v| > jump_threshold / sqrt(tau)
    double jump_median_factor = 5.0;   // and psi-dissipation > factor * trailing median
    int jump_window = 20;
    bool certify = true;               // Fitzpatrick membership test on every step
};

struct StepResult {
    Vec u_next;
    Vec xi_next;
    Vec rate;
    double fb_residual = 0.0;
    int iterations = 0;
};

struct Trajectory {
    int dim = 1;
    double tau = 0.0;
    std::vector<double> t;
    std::vector<Vec> u;
    std::vector<Vec> xi;
    std::vector<Vec> rate;          // rate[0] = 0
    std::vector<char> jump;         // jump[0] = 0
    std::vector<double> inclusion_residual;

    std::size_t size() const { return t.size(); }
};

/// An energy together with the dissipation operator.
struct Dynamics {
    Energy energy;
    MonotoneOp op;
};

namespace detail {

struct InclusionProblem {
    const Energy& energy;
    const ConvexFn& psi;
    Mat skew;             // c J (zero for cyclic steps)
    Vec u_prev;
    double t = 0.0;
    double tau = 0.0;
    double gamma = 0.0;

    Vec smooth(const Vec& v) const { return skew * v + energy.subgrad(t, u_prev + tau * v); }
    Vec residual(const Vec& v, Vec* w_out = nullptr) const
    {
        const Vec w = v - gamma * smooth(v);
        if (w_out)
            *w_out = w;
        return v - psi.prox(w, gamma);
    }
};

inline Vec solve_rate(const InclusionProblem& pb, Vec v, const StepperConfig& cfg, ErrorCode failure,
                      int& iterations, double& final_residual)
{
    const int d = static_cast<int>(v.size());
    const Mat eye = Mat::Identity(d, d);
    Vec w;
    Vec r = pb.residual(v, &w);
    double rn = r.norm();
    for (int it = 0; it < cfg.max_inner_iters; ++it) {
        iterations = it;
        if (rn <= cfg.solve_tol * (1.0 + v.norm())) {
            final_residual = rn;
            return v;
        }
        // generalized Jacobian of r: I - D_prox (I - g J_S)
        const Mat js = pb.skew + pb.tau * pb.energy.hessian_at(pb.t, pb.u_prev + pb.tau * v);
        const Vec p0 = pb.psi.prox(w, pb.gamma);
        Mat dprox(d, d);
        for (int i = 0; i < d; ++i) {
            const double h = 1e-7 * (1.0 + std::abs(w[i]));
            Vec wp = w;
            wp[i] += h;
            dprox.col(i) = (pb.psi.prox(wp, pb.gamma) - p0) / h;
        }
        const Mat jac = eye - dprox * (eye - pb.gamma * js);
        Eigen::FullPivLU<Mat> lu(jac);
        bool accepted = false;
        if (lu.isInvertible()) {
            const Vec dir = lu.solve(-r);
            for (double s = 1.0; s >= 1.0 / 1024.0; s *= 0.5) {
                const Vec vt = v + s * dir;
                Vec wt;
                const Vec rt = pb.residual(vt, &wt);
                if (rt.norm() <= (1.0 - 1e-4 * s) * rn) {
                    v = vt;
                    w = wt;
                    r = rt;
                    rn = rt.norm();
                    accepted = true;
                    break;
                }
            }
        }
        if (!accepted) {
            v = v - r;   // forward-backward step
            r = pb.residual(v, &w);
            rn = r.norm();
        }
        if (!v.allFinite())
            break;
    }
    final_residual = rn;
    if (rn <= cfg.solve_tol * (1.0 + v.norm()) && v.allFinite())
        return v;
    throw Error(failure, "rate inclusion not solved within max_inner_iters (residual " +
                             std::to_string(rn) + ")");
}

inline double default_gamma(const Energy& e, const Mat& skew, double t, const Vec& u, double tau)
{
    const Mat js = skew + tau * e.hessian_at(t, u);
    const double lip = Eigen::JacobiSVD<Mat>(js).singularValues()(0);
    return lip > 0.0 ? 1.0 / lip : 1.0;
}

} // namespace detail

/// u_next minimises tau psi((u - u_prev)/tau) + E(t_next, u) (critical point in general).
inline StepResult implicit_step_cyclic(const Energy& e, const ConvexFn& psi, const Vec& u_prev, double t_next,
                                       double tau, const StepperConfig& cfg = {}, const Vec& rate_guess = {})
{
    if (!(tau > 0.0))
        throw Error(ErrorCode::InvalidParameter, "tau must be positive");
    if (!psi.prox)
        throw Error(ErrorCode::InvalidParameter, "dissipation potential needs a prox oracle");
    const int d = e.dim;
    detail::InclusionProblem pb{e, psi, Mat::Zero(d, d), u_prev, t_next, tau, 0.0};
    pb.gamma = cfg.fb_stepsize > 0.0 ? cfg.fb_stepsize : detail::default_gamma(e, pb.skew, t_next, u_prev, tau);
    StepResult out;
    const Vec v0 = rate_guess.size() == d ? rate_guess : Vec::Zero(d);
    out.rate = detail::solve_rate(pb, v0, cfg, ErrorCode::InnerSolveFailed, out.iterations, out.fb_residual);
    out.u_next = u_prev + tau * out.rate;
    out.xi_next = e.subgrad(t_next, out.u_next);
    // incremental objective must not exceed its value at v = 0
    const double obj = tau * psi.eval(out.rate) + e.eval(t_next, out.u_next);
    const double obj0 = tau * psi.eval(Vec::Zero(d)) + e.eval(t_next, u_prev);
    if (obj > obj0 + 1e-10 * (1.0 + std::abs(obj0)))
        throw Error(ErrorCode::NonDecreasingObjective, "implicit step increased the incremental objective");
    return out;
}

/// Step for alpha = d psi + eps J, with psi the base potential of `op`.
inline StepResult implicit_step_skew(const Energy& e, const MonotoneOp& op, const Vec& u_prev, double t_next,
                                     double tau, const StepperConfig& cfg = {}, const Vec& rate_guess = {})
{
    if (op.kind != OpKind::skew_perturbed)
        throw Error(ErrorCode::InvalidParameter, "skew step needs a skew_perturbed operator");
    if (!(tau > 0.0))
        throw Error(ErrorCode::InvalidParameter, "tau must be positive");
    const ConvexFn psi = potential(*op.base);
    const int d = e.dim;
    detail::InclusionProblem pb{e, psi, op.eps * op.matrix, u_prev, t_next, tau, 0.0};
    pb.gamma = cfg.fb_stepsize > 0.0 ? cfg.fb_stepsize : detail::default_gamma(e, pb.skew, t_next, u_prev, tau);
    StepResult out;
    const Vec v0 = rate_guess.size() == d ? rate_guess : Vec::Zero(d);
    out.rate = detail::solve_rate(pb, v0, cfg, ErrorCode::SplittingDiverged, out.iterations, out.fb_residual);
    out.u_next = u_prev + tau * out.rate;
    out.xi_next = e.subgrad(t_next, out.u_next);
    return out;
}

/// Membership of (v, y) in graph(op).  When op has a potential, the Fenchel-Young gap
/// psi(v) + psi*(y - S v) - <y, v> bounds f_op(v, y) - <v, y> from above and is reported
/// if it already certifies membership; otherwise the Fitzpatrick gap is evaluated.
/// For gauges the dual point is first projected onto R K*, and the projection distance
/// (scaled by 1 + |v|) is added to the gap, so rounding across flat directions of K* does not
/// read as an infinite conjugate.
inline MembershipResult certify_inclusion(const MonotoneOp& op, const Vec& v, const Vec& y, double tol)
{
    const MonotoneOp& base = op.kind == OpKind::skew_perturbed ? *op.base : op;
    const Vec yb = op.kind == OpKind::skew_perturbed ? Vec(y - op.eps * (op.matrix * v)) : y;
    const double scale = tol * (1.0 + std::abs(v.dot(y)));
    if (base.kind == OpKind::subdiff_gauge) {
        const Vec yp = base.weight * polar_project(*base.body, yb / base.weight);
        const double gap = base.weight * gauge_eval(*base.body, v) - v.dot(yp) + (yb - yp).norm() * (1.0 + v.norm());
        if (std::isfinite(gap) && gap <= scale)
            return {true, gap};
    }
    else if (base.cyclic && base.kind != OpKind::sampled) {
        const ConvexFn psi = potential(base);
        if (psi.conjugate) {
            const double gap = psi.eval(v) + psi.conjugate(yb) - v.dot(yb);
            if (std::isfinite(gap) && gap <= scale)
                return {true, gap};
        }
    }
    return graph_membership_test(op, v, y, tol);
}

/// Discrete psi-dissipation of a step, tau psi(v), used by the jump heuristic.
inline double step_dissipation(const ConvexFn& psi, const Vec& v, double tau) { return tau * psi.eval(v); }

inline Trajectory integrate(const Dynamics& model, const Vec& u0, const StepperConfig& cfg)
{
    const Energy& e = model.energy;
    const MonotoneOp& op = model.op;
    if (!(cfg.tau > 0.0) || !(cfg.inclusion_tol > 0.0) || !(cfg.t_end > 0.0))
        throw Error(ErrorCode::InvalidParameter, "tau, t_end and inclusion_tol must be positive");
    if (u0.size() != e.dim || !e.in_box(u0))
        throw Error(ErrorCode::DomainExit, "initial state outside the domain box");
    const bool skew = op.kind == OpKind::skew_perturbed && op.eps != 0.0;
    if (cfg.mode == StepMode::prox_cyclic && skew)
        throw Error(ErrorCode::InvalidParameter, "prox_cyclic mode needs a cyclic operator");
    if (cfg.mode == StepMode::forward_backward_skew && op.kind != OpKind::skew_perturbed)
        throw Error(ErrorCode::InvalidParameter, "forward_backward_skew mode needs a skew_perturbed operator");
    const ConvexFn psi = potential(op.kind == OpKind::skew_perturbed ? *op.base : op);

    const long steps = std::lround(cfg.t_end / cfg.tau);
    Trajectory tr;
    tr.dim = e.dim;
    tr.tau = cfg.tau;
    tr.t.reserve(static_cast<std::size_t>(steps + 1));
    tr.t.push_back(0.0);
    tr.u.push_back(u0);
    tr.xi.push_back(e.subgrad(0.0, u0));
    tr.rate.push_back(Vec::Zero(e.dim));
    tr.jump.push_back(0);
    tr.inclusion_residual.push_back(0.0);

    std::vector<double> recent;   // trailing psi-dissipations
    const double rate_bar = cfg.jump_threshold / std::sqrt(cfg.tau);
    Vec guess = Vec::Zero(e.dim);
    for (long k = 1; k <= steps; ++k) {
        const double t = static_cast<double>(k) * cfg.tau;
        const Vec& u_prev = tr.u.back();
        const StepResult s = cfg.mode == StepMode::forward_backward_skew
                                 ? implicit_step_skew(e, op, u_prev, t, cfg.tau, cfg, guess)
                                 : implicit_step_cyclic(e, psi, u_prev, t, cfg.tau, cfg, guess);
        if (!e.in_box(s.u_next))
            throw Error(ErrorCode::DomainExit, "trajectory left the domain box");
        double residual = s.fb_residual;
        if (cfg.certify) {
            const MembershipResult m = certify_inclusion(op, s.rate, -s.xi_next, cfg.inclusion_tol);
            if (!m.member)
                throw Error(cfg.mode == StepMode::forward_backward_skew ? ErrorCode::SplittingDiverged
                                                                         : ErrorCode::InnerSolveFailed,
                            "step failed the inclusion certificate at t = " + std::to_string(t));
            residual = m.residual;
        }
        const double diss = step_dissipation(psi, s.rate, cfg.tau);
        bool jump = false;
        if (s.rate.norm() > rate_bar) {
            std::vector<double> tmp = recent;
            double med = 0.0;
            if (!tmp.empty()) {
                std::nth_element(tmp.begin(), tmp.begin() + static_cast<long>(tmp.size() / 2), tmp.end());
                med = tmp[tmp.size() / 2];
            }
            jump = diss > cfg.jump_median_factor * med;
        }
        recent.push_back(diss);
        if (static_cast<int>(recent.size()) > cfg.jump_window)
            recent.erase(recent.begin());

        tr.t.push_back(t);
        tr.u.push_back(s.u_next);
        tr.xi.push_back(s.xi_next);
        tr.rate.push_back(s.rate);
        tr.jump.push_back(jump ? 1 : 0);
        tr.inclusion_residual.push_back(residual);
        guess = s.rate;
    }
    return tr;
}

struct RateDecomposition {
    std::vector<std::pair<double, Vec>> ac_rates;   // (t_k, v_k)
    std::vector<std::pair<double, Vec>> jumps;      // (t_k, u_k - u_{k-1})
};

/// Steps with |v_k| > jump_threshold / sqrt(tau) are singular.
inline RateDecomposition rate_decomposition(const Trajectory& tr, double jump_threshold = 1.0)
{
    RateDecomposition out;
    const double bar = jump_threshold / std::sqrt(tr.tau);
    for (std::size_t k = 1; k < tr.size(); ++k) {
        if (tr.rate[k].norm() > bar)
            out.jumps.emplace_back(tr.t[k], tr.u[k] - tr.u[k - 1]);
        else
            out.ac_rates.emplace_back(tr.t[k], tr.rate[k]);
    }
    return out;
}

/// Builds a trajectory from states on a uniform grid; rates by backward differences.
inline Trajectory trajectory_from_states(double tau, const std::vector<Vec>& states, const Energy& e)
{
    Trajectory tr;
    tr.dim = static_cast<int>(states.front().size());
    tr.tau = tau;
    for (std::size_t k = 0; k < states.size(); ++k) {
        const double t = static_cast<double>(k) * tau;
        tr.t.push_back(t);
        tr.u.push_back(states[k]);
        tr.xi.push_back(e.subgrad(t, states[k]));
        tr.rate.push_back(k == 0 ? Vec(Vec::Zero(tr.dim)) : Vec((states[k] - states[k - 1]) / tau));
        tr.jump.push_back(0);
        tr.inclusion_residual.push_back(0.0);
    }
    return tr;
}

// Trajectory files -----------------------------------------------------------------------

inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string trajectory_header(int d)
{
    std::string h = "t";
    for (const char* name : {"u", "xi", "rate"})
        for (int i = 0; i < d; ++i)
            h += std::string(",") + name + "_" + std::to_string(i);
    return h + ",jump_flag";
}

inline std::string trajectory_row(const Trajectory& tr, std::size_t k)
{
    std::string row = format_double(tr.t[k]);
    for (const Vec* v : {&tr.u[k], &tr.xi[k], &tr.rate[k]})
        for (Eigen::Index i = 0; i < v->size(); ++i)
            row += "," + format_double((*v)[i]);
    return row + "," + (tr.jump[k] ? "1" : "0");
}

inline void write_trajectory_csv(const std::string& path, const Trajectory& tr)
{
    std::ofstream f(path);
    if (!f)
        throw Error(ErrorCode::IOFailure, "cannot write " + path);
    f << trajectory_header(tr.dim) << '\n';
    for (std::size_t k = 0; k < tr.size(); ++k)
        f << trajectory_row(tr, k) << '\n';
    if (!f)
        throw Error(ErrorCode::IOFailure, "write failed for " + path);
}

inline Trajectory read_trajectory_csv(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw Error(ErrorCode::IOFailure, "cannot read " + path);
    std::string line;
    if (!std::getline(f, line))
        throw Error(ErrorCode::IOFailure, "empty trajectory file " + path);
    const long cols = std::count(line.begin(), line.end(), ',') + 1;
    if ((cols - 2) % 3 != 0 || cols < 5)
        throw Error(ErrorCode::IOFailure, "unexpected trajectory header in " + path);
    Trajectory tr;
    tr.dim = static_cast<int>((cols - 2) / 3);
    while (std::getline(f, line)) {
        if (line.empty())
            continue;
        std::vector<double> vals;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            vals.push_back(std::stod(cell));
        if (static_cast<long>(vals.size()) != cols)
            throw Error(ErrorCode::IOFailure, "ragged row in " + path);
        const int d = tr.dim;
        tr.t.push_back(vals[0]);
        tr.u.push_back(Eigen::Map<Vec>(vals.data() + 1, d));
        tr.xi.push_back(Eigen::Map<Vec>(vals.data() + 1 + d, d));
        tr.rate.push_back(Eigen::Map<Vec>(vals.data() + 1 + 2 * d, d));
        tr.jump.push_back(vals.back() != 0.0 ? 1 : 0);
        tr.inclusion_residual.push_back(0.0);
    }
    if (tr.size() < 2)
        throw Error(ErrorCode::IOFailure, "trajectory needs at least two rows");
    tr.tau = tr.t[1] - tr.t[0];
    return tr;
}

} // namespace dnlab
