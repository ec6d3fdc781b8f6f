#pragma once

// Limit sweeps: p -> 1 (vanishing viscosity) and eps -> 0 (quasistatic), each member compared
// with the rate-independent reference solution.

#include "models.hpp"

#include <future>
#include <string>
#include <vector>

namespace dnlab {

enum class SweepAxis { p_to_one, eps_to_zero };

inline const char* to_string(SweepAxis a) { return a == SweepAxis::p_to_one ? "p_to_one" : "eps_to_zero"; }

struct SweepSpec {
    ModelSpec base;
    SweepAxis axis = SweepAxis::p_to_one;
    std::vector<double> ladder;
    StepperConfig cfg;
    double eps_tau_factor = 1.0 / 50.0;   // tau = min(cfg.tau, factor * eps) on the eps axis
    RunOptions run;
};

struct SweepRow {
    double parameter = 0.0;
    double tau = 0.0;
    double sup_error = kInf;
    double stability_margin = kInf;
    double inequality_margin = -kInf;
    bool pass = false;
    std::string status = "ok";          // failure tag when the run threw
};

struct SweepTable {
    SweepAxis axis = SweepAxis::p_to_one;
    std::vector<SweepRow> rows;
    std::vector<ModelRun> runs;         // aligned with rows; empty trajectory on failure
    double decay_exponent = 0.0;        // sup_error ~ (distance to the limit)^exponent
    double stability_exponent = 0.0;    // same fit for positive stability margins
};

namespace detail {

inline double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys)
{
    if (xs.size() < 2)
        return 0.0;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= xs.size();
    my /= ys.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return sxx > 0 ? sxy / sxx : 0.0;
}

} // namespace detail

inline void validate_ladder(const SweepSpec& sw)
{
    if (sw.ladder.empty())
        throw Error(ErrorCode::InvalidParameter, "sweep ladder is empty");
    for (std::size_t i = 0; i < sw.ladder.size(); ++i) {
        const double v = sw.ladder[i];
        const bool ok = sw.axis == SweepAxis::p_to_one ? v > 1.0 : v > 0.0;
        if (!ok)
            throw Error(ErrorCode::InvalidParameter, "ladder value outside the admissible range");
        if (i > 0 && !(v < sw.ladder[i - 1]))
            throw Error(ErrorCode::InvalidParameter, "ladder must decrease strictly toward the limit");
    }
}

inline ModelSpec sweep_member(const SweepSpec& sw, double value, StepperConfig& cfg)
{
    ModelSpec s = sw.base;
    cfg = sw.cfg;
    if (sw.axis == SweepAxis::p_to_one) {
        s.p = value;
    }
    else {
        s.eps = value;
        cfg.tau = std::min(cfg.tau, sw.eps_tau_factor * value);
    }
    return s;
}

/// Members run concurrently; rows keep ladder order.
inline SweepTable run_sweep(const SweepSpec& sw)
{
    validate_ladder(sw);
    SweepSpec spec = sw;
    spec.run.local_check = RunOptions::LocalCheck::on;   // members are judged against the limit
    std::vector<std::future<std::pair<SweepRow, ModelRun>>> jobs;
    for (double value : sw.ladder)
        jobs.push_back(std::async(std::launch::async, [&spec, value] {
            SweepRow row;
            row.parameter = value;
            StepperConfig cfg;
            const ModelSpec s = sweep_member(spec, value, cfg);
            row.tau = cfg.tau;
            ModelRun run;
            try {
                run = run_model(s, cfg, spec.run);
                row.sup_error = run.sup_error.value_or(kInf);
                row.stability_margin = run.local.stability_margin;
                row.inequality_margin = run.bv.cert.worst_margin;
                row.pass = run.pass();
            }
            catch (const Error& e) {
                row.status = to_string(e.code());
            }
            return std::make_pair(row, std::move(run));
        }));
    SweepTable table;
    table.axis = sw.axis;
    std::vector<double> xs, ys, sx, sy;
    for (auto& j : jobs) {
        auto [row, run] = j.get();
        const double dist = std::log(sw.axis == SweepAxis::p_to_one ? row.parameter - 1.0 : row.parameter);
        if (row.status == "ok" && row.sup_error > 0.0 && std::isfinite(row.sup_error)) {
            xs.push_back(dist);
            ys.push_back(std::log(row.sup_error));
        }
        if (row.status == "ok" && row.stability_margin > 0.0 && std::isfinite(row.stability_margin)) {
            sx.push_back(dist);
            sy.push_back(std::log(row.stability_margin));
        }
        table.rows.push_back(row);
        table.runs.push_back(std::move(run));
    }
    table.decay_exponent = detail::loglog_slope(xs, ys);
    table.stability_exponent = detail::loglog_slope(sx, sy);
    return table;
}

} // namespace dnlab
