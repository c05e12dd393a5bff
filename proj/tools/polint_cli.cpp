#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "polint/experiment.hpp"

namespace fs = std::filesystem;
using namespace polint;

namespace {

struct Source {
    std::string config_path;
    std::string preset_name;
    std::string out;
    std::optional<double> t_end;
};

void add_source(CLI::App* cmd, Source& src) {
    auto* cfg = cmd->add_option("--config", src.config_path, "JSON experiment config");
    auto* pre = cmd->add_option("--preset", src.preset_name, "named preset (see list-presets)");
    cfg->excludes(pre);
    cmd->add_option("--out", src.out, "output directory (default: the config's output)");
    cmd->add_option("--t-end", src.t_end, "final time");
}

ExperimentConfig resolve(const Source& src) {
    if (src.config_path.empty() && src.preset_name.empty()) throw ConfigError("one of --config or --preset is required");
    ExperimentConfig c = src.config_path.empty() ? preset(src.preset_name) : load_config(src.config_path);
    if (!src.out.empty()) c.output = src.out;
    if (src.t_end) c.t_end = *src.t_end;
    return c;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write '" + path.string() + "'");
    f << text;
    if (!f.flush()) throw Error("write failed for '" + path.string() + "'");
}

int cmd_run(const Source& src, std::optional<double> theta, std::optional<double> dt, const std::string& scheme) {
    ExperimentConfig c = resolve(src);
    if (theta) c.theta = *theta;
    if (dt) c.dt = *dt;
    if (!scheme.empty()) c.scheme = scheme_from_string(scheme);
    c.validate();
    const RunOutcome o = simulate(c);
    const fs::path dir(c.output);
    fs::create_directories(dir);
    write_file(dir / "log.csv", run_csv(o));
    write_file(dir / "summary.json", run_summary_json(c, o));
    std::printf("%s: %s after %zu steps (t = %s), %zu linear solves, max rel. H_d deviation %s\n",
                std::string(to_string(c.scheme)).c_str(), std::string(to_string(o.status)).c_str(), o.steps,
                format_double(o.rows.back().t).c_str(), o.solve_count, format_double(o.energy_max_rel_dev).c_str());
    if (o.status == RunStatus::blew_up) std::printf("  %s at step %zu\n", o.message.c_str(), o.event_step);
    if (o.status == RunStatus::failed) std::printf("  %s\n", o.message.c_str());
    std::printf("  wrote %s and %s\n", (dir / "log.csv").string().c_str(), (dir / "summary.json").string().c_str());
    return o.status == RunStatus::failed ? 1 : 0;
}

int cmd_sweep(const Source& src, const std::vector<double>& dts, const std::vector<double>& thetas,
              const std::vector<std::string>& schemes, std::string kind_name) {
    ExperimentConfig c = resolve(src);
    if (!dts.empty()) c.dt_list = dts;
    if (!thetas.empty()) c.theta_list = thetas;
    if (!schemes.empty()) {
        c.schemes.clear();
        for (const auto& s : schemes) c.schemes.push_back(scheme_from_string(s));
    }
    if (kind_name.empty()) kind_name = !thetas.empty() || (dts.empty() && c.dt_list.empty()) ? "theta" : "dt";
    const SweepKind kind = kind_name == "theta" ? SweepKind::theta : SweepKind::dt;
    c.validate();
    const SweepOutcome o = run_sweep(c, kind, default_threads());
    const fs::path dir(c.output);
    fs::create_directories(dir);
    write_file(dir / "sweep.csv", sweep_csv(o));
    write_file(dir / "sweep_summary.json", sweep_summary_json(c, o));
    for (const auto& r : o.rows)
        std::printf("%-12s dt=%-10s theta=%-6s %-8s steps=%-7zu solves=%-8zu global_error=%s\n",
                    std::string(to_string(r.scheme)).c_str(), format_double(r.dt).c_str(),
                    format_double(r.theta).c_str(), std::string(to_string(r.status)).c_str(), r.steps, r.solve_count,
                    format_double(r.global_error).c_str());
    for (const auto& f : o.fits)
        std::printf("%-12s global-error slope %s, energy endpoint slope %s\n", std::string(to_string(f.scheme)).c_str(),
                    f.global_error_slope ? format_double(*f.global_error_slope).c_str() : "n/a",
                    f.energy_slope ? format_double(*f.energy_slope).c_str() : "n/a");
    std::printf("wrote %s and %s\n", (dir / "sweep.csv").string().c_str(),
                (dir / "sweep_summary.json").string().c_str());
    return !o.rows.empty() && o.failures == o.rows.size() ? 1 : 0;
}

int cmd_stability(const std::vector<double>& thetas, double tau_max, std::size_t samples, double dt, std::size_t n_points,
                  const std::string& out) {
    const Grid1D grid = Grid1D::over(0.0, 2.0 * M_PI, n_points);
    const auto ops = make_standard_ops(grid);
    double grid_tau = 0.0;
    for (std::size_t m = 0; m <= n_points / 2; ++m)
        grid_tau = std::max(grid_tau, std::abs(discrete_tau(ops.at("d1"), ops.at("d2"), dt, static_cast<int>(m))));
    std::printf("Airy grid N=%zu, dt=%s: largest discrete tau %s, stable for theta >= %s\n", n_points,
                format_double(dt).c_str(), format_double(grid_tau).c_str(),
                format_double(stability_threshold(grid_tau)).c_str());

    const auto taus = linspace(-tau_max, tau_max, samples);
    nlohmann::ordered_json summary;
    summary["schema"] = 1;
    summary["command"] = "stability";
    summary["tau_max"] = tau_max;
    summary["samples"] = samples;
    summary["airy_grid"] = {{"n_points", n_points}, {"dt", dt}, {"tau_max", grid_tau},
                            {"threshold", stability_threshold(grid_tau)}};
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    std::string csv = "theta,tau,modulus_1,modulus_2\n";
    for (double theta : thetas) {
        const StabilityReport r = stability_scan(theta, taus);
        std::printf("theta=%-6s max |zeta| = %.15f  %s\n", format_double(theta).c_str(), r.max_modulus,
                    r.stable ? "stable" : "unstable");
        rows.push_back({{"theta", theta}, {"max_modulus", r.max_modulus}, {"stable", r.stable}});
        for (std::size_t i = 0; i < taus.size(); ++i)
            csv += format_double(theta) + ',' + format_double(taus[i]) + ',' + format_double(r.root_moduli[i][0]) + ',' +
                   format_double(r.root_moduli[i][1]) + '\n';
    }
    summary["results"] = rows;
    if (!out.empty()) {
        fs::create_directories(out);
        write_file(fs::path(out) / "stability.csv", csv);
        write_file(fs::path(out) / "stability.json", summary.dump(2) + "\n");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Polarised discrete variational derivative schemes for polynomial Hamiltonian PDEs"};
    app.require_subcommand(1);

    Source run_src;
    std::optional<double> run_theta, run_dt;
    std::string run_scheme;
    auto* run = app.add_subcommand("run", "integrate one configuration and write log.csv and summary.json");
    add_source(run, run_src);
    run->add_option("--theta", run_theta, "polarisation blend in [0, 1]");
    run->add_option("--dt", run_dt, "time step");
    run->add_option("--scheme", run_scheme, "fi_cons, li_cons, fi_midpoint or li_naive");

    Source sweep_src;
    std::vector<double> sweep_dts, sweep_thetas;
    std::vector<std::string> sweep_schemes;
    std::string sweep_kind;
    auto* sweep = app.add_subcommand("sweep", "run a list of time steps or theta values and write sweep.csv");
    add_source(sweep, sweep_src);
    sweep->add_option("--dt", sweep_dts, "comma-separated time steps")->delimiter(',');
    sweep->add_option("--theta", sweep_thetas, "comma-separated theta values")->delimiter(',');
    sweep->add_option("--schemes", sweep_schemes, "comma-separated schemes")->delimiter(',');
    sweep->add_option("--kind", sweep_kind, "dt or theta (inferred when omitted)")
        ->check(CLI::IsMember({"dt", "theta"}));

    std::vector<double> stab_thetas{0.49, 0.5};
    double tau_max = 1000.0, stab_dt = 0.01;
    std::size_t samples = 1000, n_points = 64;
    std::string stab_out;
    auto* stab = app.add_subcommand("stability", "root moduli of the two-step scheme on the linear test problem");
    stab->add_option("--theta", stab_thetas, "comma-separated theta values")->delimiter(',');
    stab->add_option("--tau-max", tau_max, "sample tau in [-tau_max, tau_max]")->check(CLI::PositiveNumber);
    stab->add_option("--samples", samples, "number of tau samples")->check(CLI::Range(std::size_t{2}, std::size_t{10000000}));
    stab->add_option("--dt", stab_dt, "Airy time step for the grid tau")->check(CLI::PositiveNumber);
    stab->add_option("--n-points", n_points, "Airy grid size")->check(CLI::Range(std::size_t{5}, std::size_t{1} << 20));
    stab->add_option("--out", stab_out, "directory for stability.csv and stability.json");

    auto* presets = app.add_subcommand("list-presets", "print the built-in presets");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(run_src, run_theta, run_dt, run_scheme);
        if (*sweep) return cmd_sweep(sweep_src, sweep_dts, sweep_thetas, sweep_schemes, sweep_kind);
        if (*stab) return cmd_stability(stab_thetas, tau_max, samples, stab_dt, n_points, stab_out);
        if (*presets) {
            for (const auto& p : list_presets()) std::printf("%-22s %s\n", p.name.c_str(), p.description.c_str());
            return 0;
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "polint: %s\n", e.what());
        return 2;
    } catch (const InvalidArgument& e) {
        std::fprintf(stderr, "polint: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "polint: %s\n", e.what());
        return 1;
    }
    return 0;
}
