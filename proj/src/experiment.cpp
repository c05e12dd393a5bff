#include "polint/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "polint/problems.hpp"

namespace polint {

using json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void field_error(const std::string& field, const std::string& msg) {
    throw ConfigError("config field '" + field + "': " + msg, field);
}

double get_number(const json& j, const std::string& field) {
    if (!j.is_number()) field_error(field, "expected a number");
    return j.get<double>();
}

long long get_integer(const json& j, const std::string& field) {
    if (!j.is_number_integer()) field_error(field, "expected an integer");
    return j.get<long long>();
}

std::string get_string(const json& j, const std::string& field) {
    if (!j.is_string()) field_error(field, "expected a string");
    return j.get<std::string>();
}

std::vector<double> get_number_list(const json& j, const std::string& field) {
    if (!j.is_array()) field_error(field, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

SchemeKind get_scheme(const json& j, const std::string& field) {
    try {
        return scheme_from_string(get_string(j, field));
    } catch (const InvalidArgument& e) {
        field_error(field, e.what());
    }
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> known, const std::string& prefix) {
    for (const auto& [key, value] : obj.items())
        if (std::find(known.begin(), known.end(), key) == known.end()) field_error(prefix + key, "unknown key");
}

Equation parse_equation(const std::string& s, int& p, const std::string& field) {
    if (s == "kdv") return Equation::kdv;
    if (s == "airy") return Equation::airy;
    if (s == "custom") return Equation::custom;
    if (s == "gkdv") return Equation::gkdv;
    if (s.starts_with("gkdv(") && s.ends_with(")")) {
        const std::string inner = s.substr(5, s.size() - 6);
        int v = 0;
        const auto [ptr, ec] = std::from_chars(inner.data(), inner.data() + inner.size(), v);
        if (ec != std::errc() || ptr != inner.data() + inner.size()) field_error(field, "bad exponent in '" + s + "'");
        p = v;
        return Equation::gkdv;
    }
    field_error(field, "unknown equation '" + s + "'");
}

std::size_t line_of(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json optional_json(const std::optional<double>& v) { return v ? nullable(*v) : json(nullptr); }

bool is_whole_steps(double t_end, double dt) {
    try {
        steps_for(t_end, dt);
        return true;
    } catch (const InvalidArgument&) {
        return false;
    }
}

}  // namespace

std::string_view to_string(Equation eq) {
    switch (eq) {
        case Equation::kdv: return "kdv";
        case Equation::gkdv: return "gkdv";
        case Equation::airy: return "airy";
        case Equation::custom: return "custom";
    }
    return "unknown";
}

std::string_view to_string(RunStatus s) {
    switch (s) {
        case RunStatus::ok: return "ok";
        case RunStatus::blew_up: return "blew_up";
        case RunStatus::failed: return "failed";
    }
    return "unknown";
}

void ExperimentConfig::validate() const {
    if (equation == Equation::gkdv && p < 3) field_error("p", "gKdV needs p >= 3");
    if (equation == Equation::custom) {
        if (density.empty()) field_error("density", "required for the custom equation");
        try {
            DensityPoly::parse(density);
        } catch (const ParseError& e) {
            field_error("density", e.what());
        }
    }
    if (grid.n_points < 5) field_error("grid.n_points", "need at least 5 points");
    if (!(grid.length > 0.0) || !std::isfinite(grid.length)) field_error("grid.length", "must be positive");
    if (!std::isfinite(grid.left)) field_error("grid.left", "must be finite");
    if (!(dt > 0.0) || !std::isfinite(dt)) field_error("dt", "must be positive");
    if (!(t_end >= dt) || !std::isfinite(t_end)) field_error("t_end", "must be at least dt");
    if (!is_whole_steps(t_end, dt)) field_error("t_end", "must be a whole number of steps of dt");
    if (!(theta >= 0.0 && theta <= 1.0)) field_error("theta", "must lie in [0, 1]");
    if (k && *k < 2) field_error("k", "must be at least 2");
    if (!(initial.c > 0.0) || !std::isfinite(initial.c)) field_error("initial.c", "must be positive");
    if (diagnostics_every == 0) field_error("diagnostics_every", "must be positive");
    if (!(blowup_factor > 1.0)) field_error("blowup_factor", "must exceed 1");
    if (!(reference_divisor >= 1.0)) field_error("reference_divisor", "must be at least 1");
    for (std::size_t i = 0; i < dt_list.size(); ++i) {
        const std::string f = "sweep.dt[" + std::to_string(i) + "]";
        if (!(dt_list[i] > 0.0)) field_error(f, "must be positive");
        if (!is_whole_steps(t_end, dt_list[i])) field_error(f, "t_end must be a whole number of steps");
    }
    for (std::size_t i = 0; i < theta_list.size(); ++i)
        if (!(theta_list[i] >= 0.0 && theta_list[i] <= 1.0))
            field_error("sweep.theta[" + std::to_string(i) + "]", "must lie in [0, 1]");
}

ExperimentConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t line = line_of(text, e.byte);
        throw ConfigError("config syntax error on line " + std::to_string(line) + ": " + e.what(), {}, line);
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(j,
                   {"equation", "p", "density", "scheme", "schemes", "grid", "dt", "t_end", "theta", "k", "initial",
                    "output", "diagnostics_every", "blowup_factor", "sweep", "reference_divisor"},
                   "");
    ExperimentConfig c;
    if (j.contains("equation")) c.equation = parse_equation(get_string(j["equation"], "equation"), c.p, "equation");
    if (j.contains("p")) c.p = static_cast<int>(get_integer(j["p"], "p"));
    if (j.contains("density")) c.density = get_string(j["density"], "density");
    if (j.contains("scheme")) c.scheme = get_scheme(j["scheme"], "scheme");
    if (j.contains("schemes")) {
        if (!j["schemes"].is_array()) field_error("schemes", "expected an array of scheme names");
        for (std::size_t i = 0; i < j["schemes"].size(); ++i)
            c.schemes.push_back(get_scheme(j["schemes"][i], "schemes[" + std::to_string(i) + "]"));
    }
    if (j.contains("grid")) {
        const json& g = j["grid"];
        if (!g.is_object()) field_error("grid", "expected an object");
        reject_unknown(g, {"n_points", "length", "left"}, "grid.");
        if (g.contains("n_points")) {
            const long long n = get_integer(g["n_points"], "grid.n_points");
            if (n < 0) field_error("grid.n_points", "must be positive");
            c.grid.n_points = static_cast<std::size_t>(n);
        }
        if (g.contains("length")) c.grid.length = get_number(g["length"], "grid.length");
        if (g.contains("left")) c.grid.left = get_number(g["left"], "grid.left");
    }
    if (j.contains("dt")) c.dt = get_number(j["dt"], "dt");
    if (j.contains("t_end")) c.t_end = get_number(j["t_end"], "t_end");
    if (j.contains("theta")) c.theta = get_number(j["theta"], "theta");
    if (j.contains("k") && !j["k"].is_null()) c.k = static_cast<int>(get_integer(j["k"], "k"));
    if (j.contains("initial")) {
        const json& in = j["initial"];
        if (!in.is_object()) field_error("initial", "expected an object");
        reject_unknown(in, {"kind", "c", "centre"}, "initial.");
        if (in.contains("kind")) {
            const std::string kind = get_string(in["kind"], "initial.kind");
            if (kind == "soliton") c.initial.kind = InitialKind::soliton;
            else if (kind == "sine") c.initial.kind = InitialKind::sine;
            else field_error("initial.kind", "expected 'soliton' or 'sine'");
        }
        if (in.contains("c")) c.initial.c = get_number(in["c"], "initial.c");
        if (in.contains("centre")) c.initial.centre = get_number(in["centre"], "initial.centre");
    }
    if (j.contains("output")) c.output = get_string(j["output"], "output");
    if (j.contains("diagnostics_every")) {
        const long long n = get_integer(j["diagnostics_every"], "diagnostics_every");
        if (n <= 0) field_error("diagnostics_every", "must be positive");
        c.diagnostics_every = static_cast<std::size_t>(n);
    }
    if (j.contains("blowup_factor")) c.blowup_factor = get_number(j["blowup_factor"], "blowup_factor");
    if (j.contains("reference_divisor")) c.reference_divisor = get_number(j["reference_divisor"], "reference_divisor");
    if (j.contains("sweep")) {
        const json& s = j["sweep"];
        if (!s.is_object()) field_error("sweep", "expected an object");
        reject_unknown(s, {"dt", "theta"}, "sweep.");
        if (s.contains("dt")) c.dt_list = get_number_list(s["dt"], "sweep.dt");
        if (s.contains("theta")) c.theta_list = get_number_list(s["theta"], "sweep.theta");
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return config_from_json(os.str());
}

namespace {

json config_json(const ExperimentConfig& c) {
    json j;
    j["equation"] = std::string(to_string(c.equation));
    if (c.equation == Equation::gkdv) j["p"] = c.p;
    if (c.equation == Equation::custom) j["density"] = c.density;
    j["scheme"] = std::string(to_string(c.scheme));
    if (!c.schemes.empty()) {
        json s = json::array();
        for (auto k : c.schemes) s.push_back(std::string(to_string(k)));
        j["schemes"] = s;
    }
    j["grid"] = {{"n_points", c.grid.n_points}, {"length", c.grid.length}, {"left", c.grid.left}};
    j["dt"] = c.dt;
    j["t_end"] = c.t_end;
    j["theta"] = c.theta;
    j["k"] = c.k ? json(*c.k) : json(nullptr);
    j["initial"] = {{"kind", c.initial.kind == InitialKind::soliton ? "soliton" : "sine"},
                    {"c", c.initial.c},
                    {"centre", c.initial.centre}};
    j["output"] = c.output;
    j["diagnostics_every"] = c.diagnostics_every;
    j["blowup_factor"] = c.blowup_factor;
    j["reference_divisor"] = c.reference_divisor;
    if (!c.dt_list.empty() || !c.theta_list.empty()) {
        json s = json::object();
        if (!c.dt_list.empty()) s["dt"] = c.dt_list;
        if (!c.theta_list.empty()) s["theta"] = c.theta_list;
        j["sweep"] = s;
    }
    return j;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& config) { return config_json(config).dump(2); }

std::vector<PresetInfo> list_presets() {
    return {
        {"kdv-soliton-fi", "KdV soliton, fully implicit midpoint scheme"},
        {"kdv-soliton-li", "KdV soliton, naive linearly implicit scheme"},
        {"kdv-soliton-fi-cons", "KdV soliton, energy-conserving fully implicit (AVF) scheme"},
        {"kdv-soliton-li-cons", "KdV soliton, conservative linearly implicit two-step scheme (theta = 1)"},
        {"airy-stable", "Airy equation from sin x, two-step scheme with theta = 0.5"},
        {"airy-unstable", "Airy equation from sin x, two-step scheme with theta = 0.49"},
        {"airy", "alias of airy-stable"},
        {"gkdv-p4", "generalised KdV p = 4 soliton (c = 0.25), two-step scheme with k = 2"},
        {"gkdv-p6", "generalised KdV p = 6 soliton (c = 0.25), three-step scheme with k = 3"},
    };
}

ExperimentConfig preset(std::string_view name) {
    ExperimentConfig c;
    c.dt_list = {0.1, 0.05, 0.025, 0.0125};
    c.output = "polint-out/" + std::string(name);
    if (name == "kdv-soliton-fi") {
        c.scheme = SchemeKind::fi_midpoint;
    } else if (name == "kdv-soliton-li") {
        c.scheme = SchemeKind::li_naive;
    } else if (name == "kdv-soliton-fi-cons") {
        c.scheme = SchemeKind::fi_cons;
    } else if (name == "kdv-soliton-li-cons") {
        c.scheme = SchemeKind::li_cons;
        c.theta = 1.0;
    } else if (name == "airy-stable" || name == "airy-unstable" || name == "airy") {
        c.equation = Equation::airy;
        c.scheme = SchemeKind::li_cons;
        c.grid = {64, 2.0 * M_PI, 0.0};
        c.dt = 0.01;
        c.t_end = 10.0;
        c.theta = name == "airy-unstable" ? 0.49 : 0.5;
        c.initial.kind = InitialKind::sine;
        c.dt_list.clear();
        c.theta_list = {0.45, 0.46, 0.47, 0.48, 0.49, 0.5, 0.51, 0.52, 0.53, 0.54, 0.55};
    } else if (name == "gkdv-p4" || name == "gkdv-p6") {
        c.equation = Equation::gkdv;
        c.p = name == "gkdv-p4" ? 4 : 6;
        c.k = name == "gkdv-p4" ? 2 : 3;
        c.scheme = SchemeKind::li_cons;
        // at c = 1 the p = 6 wave has half-width 0.5, under two grid cells
        c.initial.c = 0.25;
    } else {
        throw ConfigError("unknown preset '" + std::string(name) + "'", "preset");
    }
    c.validate();
    return c;
}

HamiltonianSystem make_system(const ExperimentConfig& config) {
    const Grid1D grid = Grid1D::over(config.grid.left, config.grid.length, config.grid.n_points);
    switch (config.equation) {
        case Equation::kdv: return kdv_system(grid);
        case Equation::gkdv: return gkdv_system(grid, config.p);
        case Equation::airy: return airy_system(grid);
        case Equation::custom: return custom_system(grid, config.density);
    }
    throw InvalidArgument("make_system: unknown equation");
}

GridFunction make_initial(const ExperimentConfig& config, const Grid1D& grid) {
    if (config.initial.kind == InitialKind::soliton) {
        const int p = config.equation == Equation::gkdv ? config.p : 3;
        return periodic_soliton(grid, config.initial.c, config.initial.centre, p);
    }
    const double kappa = 2.0 * M_PI / grid.length();
    return GridFunction::sample(grid, [&](double x) { return std::sin(kappa * (x - grid.left())); });
}

bool has_soliton_diagnostics(const ExperimentConfig& config) {
    const bool kdv = config.equation == Equation::kdv || (config.equation == Equation::gkdv && config.p == 3);
    return kdv && config.initial.kind == InitialKind::soliton;
}

RunOutcome simulate(const ExperimentConfig& config) {
    config.validate();
    RunOutcome out;
    const HamiltonianSystem sys = make_system(config);
    const Grid1D& grid = sys.grid();
    SchemeOptions opts;
    opts.theta = config.theta;
    opts.k = config.k;
    const std::size_t n_steps = steps_for(config.t_end, config.dt);
    const bool soliton = has_soliton_diagnostics(config);

    SchemeRun run(config.scheme, sys, make_initial(config, grid), config.dt, opts);
    const double sup0 = run.current().sup_norm();
    auto push_row = [&] {
        const ConservationRecord& rec = run.conservation_log().back();
        StepRow row;
        row.step = run.step_count();
        row.t = rec.t;
        row.h_d = rec.hamiltonian;
        row.polarised_h_d = rec.polarised;
        row.sup_norm = run.current().sup_norm();
        row.solve_count = run.solve_count();
        row.shape_err = row.distance_err = kNaN;
        const bool due = row.step % config.diagnostics_every == 0 || row.step == n_steps;
        if (soliton && due && std::isfinite(row.sup_norm)) {
            const auto e = shape_distance_errors(run.current(), row.t, config.initial.c, config.initial.centre);
            row.shape_err = e.shape_err;
            row.distance_err = e.distance_err;
        }
        out.rows.push_back(row);
    };
    push_row();
    for (std::size_t i = 0; i < n_steps; ++i) {
        try {
            run.step();
        } catch (const Error& e) {
            out.status = RunStatus::failed;
            out.message = e.what();
            out.event_step = run.step_count() + 1;
            break;
        }
        push_row();
        const double s = out.rows.back().sup_norm;
        if (!std::isfinite(s) || s > config.blowup_factor * sup0) {
            out.status = RunStatus::blew_up;
            out.event_step = run.step_count();
            out.message = "sup norm exceeded " + format_double(config.blowup_factor) + " times its initial value";
            break;
        }
    }

    out.steps = run.step_count();
    out.solve_count = run.solve_count();
    out.stepping_solves = run.solve_count() - run.bootstrap_solve_count();
    const auto& log = run.conservation_log();
    out.energy_max_rel_dev = max_relative_deviation(log, false);
    out.polarised_max_rel_dev = max_relative_deviation(log, true);
    out.energy_endpoint_error = std::abs(log.back().hamiltonian - log.front().hamiltonian);
    out.exact_error = kNaN;
    if (config.equation == Equation::airy && config.initial.kind == InitialKind::sine) {
        const double kappa = 2.0 * M_PI / grid.length();
        const double t = run.t();
        const auto exact = GridFunction::sample(
            grid, [&](double x) { return std::sin(kappa * (x - grid.left()) + kappa * kappa * kappa * t); });
        out.exact_error = (run.current() - exact).sup_norm();
    }
    out.final_state = run.current();
    return out;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string run_csv(const RunOutcome& outcome) {
    std::string s = "step,t,H_d,polarised_H_d,sup_norm,solve_count,shape_err,distance_err\n";
    for (const auto& r : outcome.rows) {
        s += std::to_string(r.step) + ',' + format_double(r.t) + ',' + format_double(r.h_d) + ',' +
             format_double(r.polarised_h_d) + ',' + format_double(r.sup_norm) + ',' + std::to_string(r.solve_count) +
             ',' + format_double(r.shape_err) + ',' + format_double(r.distance_err) + '\n';
    }
    return s;
}

std::string run_summary_json(const ExperimentConfig& config, const RunOutcome& o) {
    json j;
    j["schema"] = 1;
    j["command"] = "run";
    j["config"] = config_json(config);
    j["status"] = std::string(to_string(o.status));
    j["message"] = o.message.empty() ? json(nullptr) : json(o.message);
    j["event_step"] = o.status == RunStatus::ok ? json(nullptr) : json(o.event_step);
    j["steps"] = o.steps;
    j["t_final"] = o.rows.empty() ? json(nullptr) : nullable(o.rows.back().t);
    j["solve_count"] = o.solve_count;
    j["stepping_solves"] = o.stepping_solves;
    j["conservation"] = {{"H_d_initial", o.rows.empty() ? json(nullptr) : nullable(o.rows.front().h_d)},
                         {"H_d_endpoint_error", nullable(o.energy_endpoint_error)},
                         {"H_d_max_rel_dev", nullable(o.energy_max_rel_dev)},
                         {"polarised_H_d_max_rel_dev", nullable(o.polarised_max_rel_dev)}};
    json fin;
    fin["sup_norm"] = o.rows.empty() ? json(nullptr) : nullable(o.rows.back().sup_norm);
    fin["shape_err"] = o.rows.empty() ? json(nullptr) : nullable(o.rows.back().shape_err);
    fin["distance_err"] = o.rows.empty() ? json(nullptr) : nullable(o.rows.back().distance_err);
    fin["exact_error"] = nullable(o.exact_error);
    j["final"] = fin;
    return j.dump(2) + "\n";
}

// ---- sweeps ----

SweepOutcome run_sweep(const ExperimentConfig& config, SweepKind kind, unsigned threads) {
    config.validate();
    const std::vector<double>& values = kind == SweepKind::dt ? config.dt_list : config.theta_list;
    if (values.empty())
        throw ConfigError(kind == SweepKind::dt ? "dt sweep needs a non-empty sweep.dt list"
                                                : "theta sweep needs a non-empty sweep.theta list",
                          kind == SweepKind::dt ? "sweep.dt" : "sweep.theta");
    const std::vector<SchemeKind> schemes = config.schemes.empty() ? std::vector{config.scheme} : config.schemes;

    SweepOutcome out;
    out.kind = kind;
    const std::size_t n_rows = schemes.size() * values.size();
    std::vector<ExperimentConfig> cfgs(n_rows, config);
    for (std::size_t i = 0; i < n_rows; ++i) {
        cfgs[i].scheme = schemes[i / values.size()];
        (kind == SweepKind::dt ? cfgs[i].dt : cfgs[i].theta) = values[i % values.size()];
        cfgs[i].diagnostics_every = std::numeric_limits<std::size_t>::max();
    }
    // The reference run, when needed, is the last task.
    std::optional<ExperimentConfig> ref_cfg;
    if (kind == SweepKind::dt) {
        ref_cfg = config;
        ref_cfg->scheme = SchemeKind::fi_cons;
        ref_cfg->dt = *std::min_element(values.begin(), values.end()) / config.reference_divisor;
        ref_cfg->diagnostics_every = std::numeric_limits<std::size_t>::max();
        out.reference_dt = ref_cfg->dt;
    }
    std::vector<RunOutcome> results(n_rows + (ref_cfg ? 1 : 0));
    parallel_for(results.size(), threads, [&](std::size_t i) {
        results[i] = simulate(i < n_rows ? cfgs[i] : *ref_cfg);
    });
    const RunOutcome* reference = ref_cfg ? &results.back() : nullptr;
    const bool ref_ok = reference && reference->status == RunStatus::ok;

    for (std::size_t i = 0; i < n_rows; ++i) {
        const RunOutcome& r = results[i];
        SweepResultRow row;
        row.scheme = cfgs[i].scheme;
        row.dt = cfgs[i].dt;
        row.theta = cfgs[i].theta;
        row.status = r.status;
        row.message = r.message;
        row.steps = r.steps;
        row.t_final = r.rows.empty() ? kNaN : r.rows.back().t;
        row.global_error = kNaN;
        if (kind == SweepKind::dt && r.status == RunStatus::ok) {
            if (ref_ok) row.global_error = l2_distance(*r.final_state, *reference->final_state);
            else row.message = "reference run failed: " + reference->message;
        }
        row.solve_count = r.solve_count;
        row.stepping_solves = r.stepping_solves;
        row.energy_endpoint_error = r.energy_endpoint_error;
        row.energy_max_rel_dev = r.energy_max_rel_dev;
        row.polarised_max_rel_dev = r.polarised_max_rel_dev;
        row.final_sup_norm = r.rows.empty() ? kNaN : r.rows.back().sup_norm;
        row.event_step = r.event_step;
        std::vector<ConservationRecord> log;
        for (const auto& s : r.rows) log.push_back({s.t, s.h_d, s.polarised_h_d});
        row.energy_trailing_drift = trailing_drift(log);
        if (r.status == RunStatus::failed) ++out.failures;
        out.rows.push_back(std::move(row));
    }

    if (kind == SweepKind::dt) {
        for (std::size_t s = 0; s < schemes.size(); ++s) {
            SchemeFit fit;
            fit.scheme = schemes[s];
            std::vector<double> dts, errs;
            std::vector<EnergySeries> series;
            for (std::size_t v = 0; v < values.size(); ++v) {
                const std::size_t i = s * values.size() + v;
                const SweepResultRow& row = out.rows[i];
                if (row.status != RunStatus::ok) continue;
                if (row.global_error > 0.0) {
                    dts.push_back(row.dt);
                    errs.push_back(row.global_error);
                }
                EnergySeries es{row.dt, {}};
                for (const auto& sr : results[i].rows) es.log.push_back({sr.t, sr.h_d, sr.polarised_h_d});
                series.push_back(std::move(es));
            }
            if (dts.size() >= 2) fit.global_error_slope = fit_loglog(dts, errs).slope;
            const bool long_enough =
                std::all_of(series.begin(), series.end(), [](const EnergySeries& e) { return e.log.size() >= 100; });
            if (series.size() >= 3 && long_enough) fit.energy_slope = energy_drift_study(series).slope;
            out.fits.push_back(fit);
        }
    }
    return out;
}

std::string sweep_csv(const SweepOutcome& outcome) {
    std::string s =
        "scheme,dt,theta,status,steps,t_final,global_error,solve_count,stepping_solves,energy_endpoint_error,"
        "energy_trailing_drift,energy_max_rel_dev,polarised_max_rel_dev,final_sup_norm,event_step,message\n";
    for (const auto& r : outcome.rows) {
        std::string msg = r.message;
        std::replace(msg.begin(), msg.end(), '"', '\'');
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        s += std::string(to_string(r.scheme)) + ',' + format_double(r.dt) + ',' + format_double(r.theta) + ',' +
             std::string(to_string(r.status)) + ',' + std::to_string(r.steps) + ',' + format_double(r.t_final) + ',' +
             format_double(r.global_error) + ',' + std::to_string(r.solve_count) + ',' +
             std::to_string(r.stepping_solves) + ',' + format_double(r.energy_endpoint_error) + ',' +
             format_double(r.energy_trailing_drift) + ',' + format_double(r.energy_max_rel_dev) + ',' +
             format_double(r.polarised_max_rel_dev) + ',' + format_double(r.final_sup_norm) + ',' +
             std::to_string(r.event_step) + ",\"" + msg + "\"\n";
    }
    return s;
}

std::string sweep_summary_json(const ExperimentConfig& config, const SweepOutcome& o) {
    json j;
    j["schema"] = 1;
    j["command"] = "sweep";
    j["kind"] = o.kind == SweepKind::dt ? "dt" : "theta";
    j["config"] = config_json(config);
    j["rows"] = o.rows.size();
    j["failures"] = o.failures;
    if (o.kind == SweepKind::dt) {
        j["reference"] = {{"scheme", "fi_cons"}, {"dt", o.reference_dt}};
        json fits = json::array();
        for (const auto& f : o.fits)
            fits.push_back({{"scheme", std::string(to_string(f.scheme))},
                            {"global_error_slope", optional_json(f.global_error_slope)},
                            {"energy_endpoint_slope", optional_json(f.energy_slope)}});
        j["fits"] = fits;
    } else {
        // Per scheme: largest θ that blew up and smallest θ that stayed bounded.
        json tr = json::array();
        std::set<SchemeKind> seen;
        for (const auto& r : o.rows) {
            if (!seen.insert(r.scheme).second) continue;
            std::optional<double> unstable, stable;
            for (const auto& q : o.rows) {
                if (q.scheme != r.scheme) continue;
                if (q.status == RunStatus::blew_up) unstable = std::max(unstable.value_or(q.theta), q.theta);
                if (q.status == RunStatus::ok) stable = std::min(stable.value_or(q.theta), q.theta);
            }
            tr.push_back({{"scheme", std::string(to_string(r.scheme))},
                          {"largest_unstable_theta", optional_json(unstable)},
                          {"smallest_stable_theta", optional_json(stable)}});
        }
        j["stability_transition"] = tr;
    }
    return j.dump(2) + "\n";
}

unsigned default_threads() {
    if (const char* env = std::getenv("POLINT_THREADS")) {
        unsigned v = 0;
        const std::string_view s(env);
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec == std::errc() && ptr == s.data() + s.size() && v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace polint
