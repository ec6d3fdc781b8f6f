#pragma once

// Report files: trajectory and ledger tables, sweep tables with plot-ready long-format
// series, and JSON summaries.  No timestamps or host data, so identical inputs give
// byte-identical files.

#include "config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace dnlab {

namespace fs = std::filesystem;

/// $DNLAB_OUTPUT_ROOT, else ./dnlab_out.
inline fs::path output_root()
{
    const char* env = std::getenv("DNLAB_OUTPUT_ROOT");
    return env && *env ? fs::path(env) : fs::path("dnlab_out");
}

namespace detail {

/// JSON has no infinities; they are written as the strings "inf" / "-inf".
inline json number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    return v;
}

inline void write_text(const fs::path& p, const std::string& text)
{
    std::ofstream f(p, std::ios::binary);
    if (!f)
        throw Error(ErrorCode::IOFailure, "cannot write " + p.string());
    f << text;
    if (!f)
        throw Error(ErrorCode::IOFailure, "write failed for " + p.string());
}

inline void make_dir(const fs::path& p)
{
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec)
        throw Error(ErrorCode::IOFailure, "cannot create " + p.string() + ": " + ec.message());
}

} // namespace detail

inline json certificate_json(const Certificate& c)
{
    return {{"name", c.name}, {"pass", c.pass}, {"worst_margin", detail::number(c.worst_margin)},
            {"location", c.location}};
}

inline json run_summary(const ModelRun& r, const ModelSpec& spec)
{
    json certs = json::array();
    for (const Certificate& c : r.certificates) {
        certs.push_back(certificate_json(c));
        if (!r.model.scope.empty())
            certs.back()["scope"] = r.model.scope;
    }
    json j = {{"model", model_to_json(spec)},
              {"stepper", stepper_to_json(r.cfg)},
              {"steps", r.traj.size() > 0 ? r.traj.size() - 1 : 0},
              {"pass", r.pass()},
              {"certificates", certs}};
    int jumps = 0;
    for (char f : r.traj.jump)
        jumps += f;
    j["jump_steps"] = jumps;
    j["coercivity"] = {{"p", r.coercivity.p},
                       {"q", detail::number(r.coercivity.q)},
                       {"c", r.coercivity.c},
                       {"c3", r.coercivity.c3}};
    if (r.identity_residual)
        j["identity_residual"] = detail::number(*r.identity_residual);
    if (r.sup_error)
        j["sup_error"] = detail::number(*r.sup_error);
    if (!r.traj.u.empty())
        j["terminal_state"] = std::vector<double>(r.traj.u.back().data(), r.traj.u.back().data() + r.traj.dim);
    return j;
}

/// trajectory.csv, ledger.csv and summary.json in `dir`.
inline void emit_run(const ModelRun& r, const ModelSpec& spec, const fs::path& dir)
{
    detail::make_dir(dir);
    write_trajectory_csv((dir / "trajectory.csv").string(), r.traj);
    write_ledger_csv((dir / "ledger.csv").string(), r.traj, r.ledger);
    detail::write_text(dir / "summary.json", run_summary(r, spec).dump(2) + "\n");
}

inline std::string sweep_table_csv(const SweepTable& t)
{
    std::string s = "parameter,tau,sup_error,stability_margin,inequality_margin,pass,status\n";
    for (const SweepRow& r : t.rows)
        s += format_double(r.parameter) + "," + format_double(r.tau) + "," + format_double(r.sup_error) + "," +
             format_double(r.stability_margin) + "," + format_double(r.inequality_margin) + "," +
             (r.pass ? "1" : "0") + "," + r.status + "\n";
    return s;
}

/// Long format (x, y, series) for plotting.
inline std::string sweep_plot_csv(const SweepTable& t)
{
    std::string s = "x,y,series\n";
    for (const char* series : {"sup_error", "stability_margin", "inequality_margin"})
        for (const SweepRow& r : t.rows) {
            const double y = std::string(series) == "sup_error"          ? r.sup_error
                             : std::string(series) == "stability_margin" ? r.stability_margin
                                                                         : r.inequality_margin;
            s += format_double(r.parameter) + "," + format_double(y) + "," + series + "\n";
        }
    return s;
}

inline json sweep_summary(const SweepTable& t, const SweepSpec& sw)
{
    json rows = json::array();
    bool all_ok = true;
    for (const SweepRow& r : t.rows) {
        rows.push_back({{"parameter", r.parameter},
                        {"tau", r.tau},
                        {"sup_error", detail::number(r.sup_error)},
                        {"stability_margin", detail::number(r.stability_margin)},
                        {"inequality_margin", detail::number(r.inequality_margin)},
                        {"pass", r.pass},
                        {"status", r.status}});
        all_ok = all_ok && r.status == "ok";
    }
    const SweepRow& last = t.rows.back();
    return {{"axis", to_string(t.axis)},
            {"model", model_to_json(sw.base)},
            {"stepper", stepper_to_json(sw.cfg)},
            {"ladder", sw.ladder},
            {"rows", rows},
            {"decay_exponent", detail::number(t.decay_exponent)},
            {"stability_exponent", detail::number(t.stability_exponent)},
            {"all_runs_completed", all_ok},
            {"limit_row",
             {{"parameter", last.parameter},
              {"stability_margin", detail::number(last.stability_margin)},
              {"inequality_margin", detail::number(last.inequality_margin)}}}};
}

/// sweep_table.csv, sweep_plot.csv, summary.json and run_<i>/ per member in `dir`.
inline void emit_sweep(const SweepTable& t, const SweepSpec& sw, const fs::path& dir)
{
    if (t.rows.empty())
        throw Error(ErrorCode::IOFailure, "empty result set, nothing written");
    detail::make_dir(dir);
    detail::write_text(dir / "sweep_table.csv", sweep_table_csv(t));
    detail::write_text(dir / "sweep_plot.csv", sweep_plot_csv(t));
    detail::write_text(dir / "summary.json", sweep_summary(t, sw).dump(2) + "\n");
    for (std::size_t i = 0; i < t.runs.size(); ++i) {
        if (t.rows[i].status != "ok")
            continue;
        ModelSpec member = sw.base;
        (sw.axis == SweepAxis::p_to_one ? member.p : member.eps) = t.rows[i].parameter;
        emit_run(t.runs[i], member, dir / ("run_" + std::to_string(i)));
    }
}

/// Writes each run into `dir/<index>_<model name>`; refuses an empty result set before
/// touching the file system.
inline void emit_report(const std::vector<std::pair<ModelRun, ModelSpec>>& results, const fs::path& dir)
{
    if (results.empty())
        throw Error(ErrorCode::IOFailure, "empty result set, nothing written");
    if (results.size() == 1) {
        emit_run(results[0].first, results[0].second, dir);
        return;
    }
    for (std::size_t i = 0; i < results.size(); ++i)
        emit_run(results[i].first, results[i].second, dir / (std::to_string(i) + "_" + results[i].second.name));
}

} // namespace dnlab
