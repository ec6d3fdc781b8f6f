// dnlab: tabulate representative functions, run models and sweeps, re-check trajectories.
// Exit codes: 0 all certificates pass, 2 a diagnostic failed, 1 runtime or usage error.

#include <dnlab/dnlab.hpp>

#include <CLI11.hpp>

#include <iostream>

using namespace dnlab;

namespace {

constexpr int kPass = 0;
constexpr int kRuntimeError = 1;
constexpr int kDiagnosticsFail = 2;

std::vector<double> parse_grid(const std::string& g)
{
    double lo = 0, hi = 0;
    int n = 0;
    char c1 = 0, c2 = 0;
    std::stringstream ss(g);
    if (!(ss >> lo >> c1 >> hi >> c2 >> n) || c1 != ':' || c2 != ':' || n < 2 || !(hi > lo) || !ss.eof())
        throw Error(ErrorCode::ConfigError, "grid must look like lo:hi:n with n >= 2 and hi > lo");
    std::vector<double> xs;
    for (int i = 0; i < n; ++i)
        xs.push_back(lo + (hi - lo) * i / (n - 1));
    return xs;
}

int cmd_repr(const std::string& tag, const std::string& grid, std::string out)
{
    const MonotoneOp op = parse_op_tag(tag);
    const std::vector<double> xs = parse_grid(grid);
    const ConvexFn psi = potential(op);
    if (out.empty())
        out = (output_root() / "repr.csv").string();
    const fs::path parent = fs::path(out).parent_path();
    if (!parent.empty())
        fs::create_directories(parent);
    std::ofstream f(out);
    if (!f)
        throw Error(ErrorCode::IOFailure, "cannot write " + out);
    f << "x,y,pairing,fitzpatrick,bipotential,penot\n";
    for (double x : xs)
        for (double y : xs) {
            const Vec vx = Vec::Constant(1, x), vy = Vec::Constant(1, y);
            f << format_double(x) << ',' << format_double(y) << ',' << format_double(x * y) << ','
              << format_double(fitzpatrick_eval(op, vx, vy)) << ',' << format_double(bipotential_eval(psi, vx, vy))
              << ',' << format_double(penot_eval(op, vx, vy)) << '\n';
        }
    std::cout << "wrote " << out << " (" << xs.size() * xs.size() << " rows)\n";
    return kPass;
}

void print_certificates(const ModelRun& r)
{
    for (const Certificate& c : r.certificates)
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " worst_margin=" << format_double(c.worst_margin)
                  << " at t=" << format_double(c.location) << "\n";
    if (r.sup_error)
        std::cout << "sup distance to the rate-independent reference: " << format_double(*r.sup_error) << "\n";
}

int cmd_solve(const std::string& config, std::string out)
{
    const SolveConfig c = parse_solve_config(read_json_file(config));
    const ModelRun r = run_model(c.model, c.stepper, c.diagnostics);
    const fs::path dir = out.empty() ? output_root() / c.model.name : fs::path(out);
    emit_report({{r, c.model}}, dir);
    print_certificates(r);
    std::cout << "wrote " << dir.string() << "\n";
    return r.pass() ? kPass : kDiagnosticsFail;
}

int cmd_sweep(const std::string& config, std::string out)
{
    const SweepSpec sw = parse_sweep_config(read_json_file(config));
    const SweepTable t = run_sweep(sw);
    const fs::path dir = out.empty() ? output_root() / ("sweep_" + sw.base.name) : fs::path(out);
    emit_sweep(t, sw, dir);
    std::cout << sweep_table_csv(t) << "decay_exponent=" << format_double(t.decay_exponent)
              << " stability_exponent=" << format_double(t.stability_exponent) << "\n";
    bool ok = true;
    for (const SweepRow& r : t.rows)
        ok = ok && r.status == "ok";
    const SweepRow& last = t.rows.back();
    const bool limit_ok = last.stability_margin <= sw.run.stability_tol && last.inequality_margin >= -1e-4;
    std::cout << (ok ? "PASS" : "FAIL") << " all members completed\n"
              << (limit_ok ? "PASS" : "FAIL") << " limit-row certificates (stability margin "
              << format_double(last.stability_margin) << ", inequality margin "
              << format_double(last.inequality_margin) << ")\n"
              << "wrote " << dir.string() << "\n";
    return ok && limit_ok ? kPass : kDiagnosticsFail;
}

int cmd_check(const std::string& traj_path, const std::string& model_config)
{
    const SolveConfig c = parse_solve_config(read_json_file(model_config));
    const Model m = build_model(c.model);
    Trajectory tr = read_trajectory_csv(traj_path);
    if (tr.dim != m.dyn.energy.dim)
        throw Error(ErrorCode::ConfigError, "trajectory dimension does not match the model");
    ModelRun r;
    r.model = m;
    r.traj = tr;
    r.ledger = build_ledger(tr, m.dyn.op, m.dyn.energy);
    r.bv = bv_energy_inequality_check(tr, m.dyn.op, m.dyn.energy, c.diagnostics.bv_tol);
    r.certificates.push_back(r.bv.cert);
    int inclusion_failures = 0;
    double worst = 0.0;
    double where = 0.0;
    for (std::size_t k = 1; k < tr.size(); ++k) {
        if (tr.jump[k])
            continue;
        const MembershipResult mr = certify_inclusion(m.dyn.op, tr.rate[k], -tr.xi[k], c.stepper.inclusion_tol);
        if (!mr.member)
            ++inclusion_failures;
        if (mr.residual > worst) {
            worst = mr.residual;
            where = tr.t[k];
        }
    }
    r.certificates.push_back({"discrete_inclusion", inclusion_failures == 0, -worst, where});
    if (wants_local_check(m.dyn.op, c.diagnostics.local_check)) {
        r.local = local_solution_check(reduce_trajectory(tr, m.reduced), m.reduced.op, m.reduced.energy,
                                       c.diagnostics.stability_tol);
        r.certificates.push_back({"local_stability", r.local.stability_margin <= c.diagnostics.stability_tol,
                                  0.0 - r.local.stability_margin, r.local.stability_location});
    }
    if (m.oracle)
        r.sup_error = sup_distance(tr, m.reduced.components, m.oracle(tr.t));
    print_certificates(r);
    return r.pass() ? kPass : kDiagnosticsFail;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"dnlab: doubly nonlinear evolutions through representative functions"};
    app.require_subcommand(1);

    std::string op = "identity", grid = "-2:2:41", out, config, traj, model;
    auto* repr = app.add_subcommand("repr", "tabulate representative functions of a 1-d operator");
    repr->add_option("--op", op, "identity | abs:R | pnorm:p[:w] | linear:a")->capture_default_str();
    repr->add_option("--grid", grid, "lo:hi:n, used for both axes")->capture_default_str();
    repr->add_option("--out", out, "output file (default $DNLAB_OUTPUT_ROOT/repr.csv)");

    auto* solve = app.add_subcommand("solve", "integrate one model and certify it");
    solve->add_option("--config", config, "solve config (JSON)")->required();
    solve->add_option("--out", out, "output directory");

    auto* sweep = app.add_subcommand("sweep", "run a p -> 1 or eps -> 0 sweep");
    sweep->add_option("--config", config, "sweep config (JSON)")->required();
    sweep->add_option("--out", out, "output directory");

    auto* check = app.add_subcommand("check", "re-run diagnostics on a stored trajectory");
    check->add_option("--traj", traj, "trajectory CSV")->required();
    check->add_option("--model", model, "solve config (JSON) describing the model")->required();

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kRuntimeError;
    }

    try {
        if (*repr)
            return cmd_repr(op, grid, out);
        if (*solve)
            return cmd_solve(config, out);
        if (*sweep)
            return cmd_sweep(config, out);
        if (*check)
            return cmd_check(traj, model);
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
    return kRuntimeError;
}
