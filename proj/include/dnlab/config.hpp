#pragma once

// JSON configuration for models, stepper settings and sweeps.  Unknown keys are rejected so
// typos surface as ConfigError instead of silently falling back to defaults.

#include "sweep.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <string>

namespace dnlab {

using json = nlohmann::json;

namespace detail {

inline void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where)
{
    if (!j.is_object())
        throw Error(ErrorCode::ConfigError, where + " must be an object");
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key))
            throw Error(ErrorCode::ConfigError, "unknown key '" + key + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where)
{
    if (!j.contains(key))
        return;
    try {
        out = j.at(key).get<T>();
    }
    catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, where + "." + key + ": " + e.what());
    }
}

inline Vec read_vec(const json& j, const std::string& where)
{
    if (!j.is_array())
        throw Error(ErrorCode::ConfigError, where + " must be an array of numbers");
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number())
            throw Error(ErrorCode::ConfigError, where + " must be an array of numbers");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

} // namespace detail

inline Load parse_load(const json& j)
{
    const std::string w = "load";
    if (!j.is_object() || !j.contains("type"))
        throw Error(ErrorCode::ConfigError, "load needs a 'type'");
    const std::string type = j.at("type").get<std::string>();
    if (type == "constant") {
        detail::check_keys(j, {"type", "value"}, w);
        double v = 0.0;
        detail::read(j, "value", v, w);
        return Load::constant(v);
    }
    if (type == "ramp") {
        detail::check_keys(j, {"type", "slope", "offset"}, w);
        double s = 1.0, o = 0.0;
        detail::read(j, "slope", s, w);
        detail::read(j, "offset", o, w);
        return Load::ramp(s, o);
    }
    if (type == "sine") {
        detail::check_keys(j, {"type", "amplitude", "omega", "phase", "offset"}, w);
        double a = 1.0, om = 1.0, ph = 0.0, o = 0.0;
        detail::read(j, "amplitude", a, w);
        detail::read(j, "omega", om, w);
        detail::read(j, "phase", ph, w);
        detail::read(j, "offset", o, w);
        return Load::sine(a, om, ph, o);
    }
    if (type == "piecewise_linear") {
        detail::check_keys(j, {"type", "t", "v"}, w);
        if (!j.contains("t") || !j.contains("v"))
            throw Error(ErrorCode::ConfigError, "piecewise_linear load needs 't' and 'v'");
        try {
            return Load::piecewise(j.at("t").get<std::vector<double>>(), j.at("v").get<std::vector<double>>());
        }
        catch (const json::exception& e) {
            throw Error(ErrorCode::ConfigError, std::string("load knots: ") + e.what());
        }
        catch (const Error& e) {
            throw Error(ErrorCode::ConfigError, e.what());
        }
    }
    throw Error(ErrorCode::ConfigError, "unknown load type '" + type + "'");
}

inline json load_to_json(const Load& l)
{
    switch (l.kind) {
    case Load::Kind::constant: return {{"type", "constant"}, {"value", l.offset}};
    case Load::Kind::ramp: return {{"type", "ramp"}, {"slope", l.slope}, {"offset", l.offset}};
    case Load::Kind::sine:
        return {{"type", "sine"}, {"amplitude", l.amplitude}, {"omega", l.omega}, {"phase", l.phase}, {"offset", l.offset}};
    case Load::Kind::piecewise_linear: return {{"type", "piecewise_linear"}, {"t", l.knot_t}, {"v", l.knot_v}};
    }
    return {};
}

inline ModelSpec parse_model(const json& j)
{
    const std::string w = "model";
    detail::check_keys(j, {"name", "R", "k", "mass", "eps", "p", "hardening", "elasticity", "density", "nodes",
                           "load", "u0", "horizon", "half_width"},
                       w);
    ModelSpec s;
    detail::read(j, "name", s.name, w);
    detail::read(j, "R", s.R, w);
    detail::read(j, "k", s.k, w);
    detail::read(j, "mass", s.mass, w);
    detail::read(j, "eps", s.eps, w);
    detail::read(j, "p", s.p, w);
    detail::read(j, "hardening", s.hardening, w);
    detail::read(j, "elasticity", s.elasticity, w);
    detail::read(j, "density", s.density, w);
    detail::read(j, "nodes", s.nodes, w);
    detail::read(j, "horizon", s.horizon, w);
    detail::read(j, "half_width", s.half_width, w);
    if (j.contains("load"))
        s.load = parse_load(j.at("load"));
    if (j.contains("u0"))
        s.u0 = detail::read_vec(j.at("u0"), "model.u0");
    return s;
}

inline json model_to_json(const ModelSpec& s)
{
    json j = {{"name", s.name},   {"R", s.R},
              {"k", s.k},         {"mass", s.mass},
              {"eps", s.eps},     {"p", s.p},
              {"hardening", s.hardening}, {"elasticity", s.elasticity},
              {"density", s.density},     {"nodes", s.nodes},
              {"load", load_to_json(s.load)}, {"horizon", s.horizon},
              {"half_width", s.half_width}};
    j["u0"] = std::vector<double>(s.u0.data(), s.u0.data() + s.u0.size());
    return j;
}

inline StepperConfig parse_stepper(const json& j)
{
    const std::string w = "stepper";
    detail::check_keys(j, {"tau", "inclusion_tol", "max_inner_iters", "fb_stepsize", "solve_tol", "jump_threshold",
                           "jump_median_factor", "jump_window", "certify"},
                       w);
    StepperConfig c;
    detail::read(j, "tau", c.tau, w);
    detail::read(j, "inclusion_tol", c.inclusion_tol, w);
    detail::read(j, "max_inner_iters", c.max_inner_iters, w);
    detail::read(j, "fb_stepsize", c.fb_stepsize, w);
    detail::read(j, "solve_tol", c.solve_tol, w);
    detail::read(j, "jump_threshold", c.jump_threshold, w);
    detail::read(j, "jump_median_factor", c.jump_median_factor, w);
    detail::read(j, "jump_window", c.jump_window, w);
    detail::read(j, "certify", c.certify, w);
    if (!(c.tau > 0.0) || !(c.inclusion_tol > 0.0) || c.max_inner_iters < 1 || !(c.fb_stepsize >= 0.0))
        throw Error(ErrorCode::ConfigError, "stepper needs tau > 0, inclusion_tol > 0, max_inner_iters >= 1");
    return c;
}

inline json stepper_to_json(const StepperConfig& c)
{
    return {{"tau", c.tau},
            {"inclusion_tol", c.inclusion_tol},
            {"max_inner_iters", c.max_inner_iters},
            {"fb_stepsize", c.fb_stepsize},
            {"solve_tol", c.solve_tol},
            {"jump_threshold", c.jump_threshold},
            {"jump_median_factor", c.jump_median_factor},
            {"jump_window", c.jump_window},
            {"certify", c.certify}};
}

inline RunOptions parse_run_options(const json& j)
{
    const std::string w = "diagnostics";
    detail::check_keys(j, {"bv_tol", "stability_tol", "identity_scale", "local_check"}, w);
    RunOptions o;
    detail::read(j, "bv_tol", o.bv_tol, w);
    detail::read(j, "stability_tol", o.stability_tol, w);
    detail::read(j, "identity_scale", o.identity_scale, w);
    if (j.contains("local_check")) {
        const std::string v = j.at("local_check").get<std::string>();
        if (v == "automatic")
            o.local_check = RunOptions::LocalCheck::automatic;
        else if (v == "on")
            o.local_check = RunOptions::LocalCheck::on;
        else if (v == "off")
            o.local_check = RunOptions::LocalCheck::off;
        else
            throw Error(ErrorCode::ConfigError, "diagnostics.local_check must be automatic, on or off");
    }
    return o;
}

struct SolveConfig {
    ModelSpec model;
    StepperConfig stepper;
    RunOptions diagnostics;
};

inline SolveConfig parse_solve_config(const json& j)
{
    detail::check_keys(j, {"model", "stepper", "diagnostics"}, "solve config");
    if (!j.contains("model"))
        throw Error(ErrorCode::ConfigError, "solve config needs a 'model'");
    SolveConfig c;
    c.model = parse_model(j.at("model"));
    if (j.contains("stepper"))
        c.stepper = parse_stepper(j.at("stepper"));
    if (j.contains("diagnostics"))
        c.diagnostics = parse_run_options(j.at("diagnostics"));
    return c;
}

inline SweepSpec parse_sweep_config(const json& j)
{
    detail::check_keys(j, {"model", "stepper", "diagnostics", "axis", "ladder", "eps_tau_factor"}, "sweep config");
    if (!j.contains("model") || !j.contains("axis") || !j.contains("ladder"))
        throw Error(ErrorCode::ConfigError, "sweep config needs 'model', 'axis' and 'ladder'");
    SweepSpec sw;
    sw.base = parse_model(j.at("model"));
    if (j.contains("stepper"))
        sw.cfg = parse_stepper(j.at("stepper"));
    if (j.contains("diagnostics"))
        sw.run = parse_run_options(j.at("diagnostics"));
    const std::string axis = j.at("axis").get<std::string>();
    if (axis == "p_to_one")
        sw.axis = SweepAxis::p_to_one;
    else if (axis == "eps_to_zero")
        sw.axis = SweepAxis::eps_to_zero;
    else
        throw Error(ErrorCode::ConfigError, "axis must be p_to_one or eps_to_zero");
    detail::read(j, "ladder", sw.ladder, "sweep config");
    detail::read(j, "eps_tau_factor", sw.eps_tau_factor, "sweep config");
    try {
        validate_ladder(sw);
    }
    catch (const Error& e) {
        throw Error(ErrorCode::ConfigError, e.what());
    }
    return sw;
}

inline json read_json_file(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw Error(ErrorCode::IOFailure, "cannot read " + path);
    try {
        return json::parse(f, nullptr, true, true);   // comments allowed
    }
    catch (const json::parse_error& e) {
        throw Error(ErrorCode::ConfigError, path + ": " + e.what());
    }
}

/// One-dimensional operator tags for tabulation: identity, abs:R, pnorm:p[:w], linear:a.
inline MonotoneOp parse_op_tag(const std::string& tag)
{
    std::vector<std::string> parts;
    std::stringstream ss(tag);
    for (std::string p; std::getline(ss, p, ':');)
        parts.push_back(p);
    auto num = [&](std::size_t i, double fallback) {
        if (i >= parts.size())
            return fallback;
        try {
            std::size_t used = 0;
            const double v = std::stod(parts[i], &used);
            if (used != parts[i].size())
                throw std::invalid_argument(parts[i]);
            return v;
        }
        catch (const std::exception&) {
            throw Error(ErrorCode::ConfigError, "bad number '" + parts[i] + "' in operator tag " + tag);
        }
    };
    if (parts.empty())
        throw Error(ErrorCode::ConfigError, "empty operator tag");
    const std::string& k = parts[0];
    try {
        if (k == "identity" && parts.size() == 1)
            return identity_op();
        if (k == "abs" && parts.size() <= 2)
            return abs_op(num(1, 1.0));
        if (k == "pnorm" && parts.size() >= 2 && parts.size() <= 3)
            return pnorm_op(1, num(1, 2.0), num(2, 1.0));
        if (k == "linear" && parts.size() == 2)
            return linear_op(Mat::Constant(1, 1, num(1, 1.0)));
    }
    catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError)
            throw;
        throw Error(ErrorCode::ConfigError, std::string("operator tag ") + tag + ": " + e.what());
    }
    throw Error(ErrorCode::ConfigError, "unknown operator tag '" + tag + "' (identity, abs:R, pnorm:p[:w], linear:a)");
}

} // namespace dnlab
