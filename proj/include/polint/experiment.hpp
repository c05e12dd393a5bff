#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "polint/analysis.hpp"

namespace polint {

/// Bad configuration; `field` is the offending key path ("grid.n_points") or empty for syntax errors.
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, std::string field = {}, std::size_t line = 0)
        : Error(what), field_(std::move(field)), line_(line) {}
    const std::string& field() const { return field_; }
    /// 1-based line of a syntax error, 0 otherwise.
    std::size_t line() const { return line_; }

private:
    std::string field_;
    std::size_t line_;
};

enum class Equation { kdv, gkdv, airy, custom };

std::string_view to_string(Equation eq);

struct GridSpec {
    std::size_t n_points = 32;
    double length = 10.0;
    double left = -5.0;
};

enum class InitialKind { soliton, sine };

struct InitialSpec {
    InitialKind kind = InitialKind::soliton;
    double c = 1.0;
    double centre = 0.0;
};

struct ExperimentConfig {
    Equation equation = Equation::kdv;
    /// gKdV exponent; 3 for kdv.
    int p = 3;
    /// Density for Equation::custom.
    std::string density;
    SchemeKind scheme = SchemeKind::li_cons;
    GridSpec grid;
    double dt = 0.1;
    double t_end = 100.0;
    double theta = 0.5;
    std::optional<int> k;
    InitialSpec initial;
    std::string output = "polint-out";
    /// Soliton diagnostics are computed on every n-th level and at the last one.
    std::size_t diagnostics_every = 1;
    double blowup_factor = 1e3;

    // sweep inputs
    std::vector<SchemeKind> schemes;  ///< defaults to {scheme}
    std::vector<double> dt_list;
    std::vector<double> theta_list;
    /// Global-error reference: fi_cons with min(dt_list)/reference_divisor.
    double reference_divisor = 64.0;

    /// Throws ConfigError naming the first bad field.
    void validate() const;
};

/// Parses a JSON config; unknown keys and type mismatches are ConfigErrors.
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& config);

struct PresetInfo {
    std::string name;
    std::string description;
};

std::vector<PresetInfo> list_presets();
ExperimentConfig preset(std::string_view name);

HamiltonianSystem make_system(const ExperimentConfig& config);
GridFunction make_initial(const ExperimentConfig& config, const Grid1D& grid);

// ---- single runs ----

struct StepRow {
    std::size_t step = 0;
    double t = 0.0;
    double h_d = 0.0;
    double polarised_h_d = 0.0;  ///< NaN unless li_cons after its starting values
    double sup_norm = 0.0;
    std::size_t solve_count = 0;
    double shape_err = 0.0;  ///< NaN for non-soliton runs and skipped levels
    double distance_err = 0.0;
};

enum class RunStatus { ok, blew_up, failed };

std::string_view to_string(RunStatus s);

struct RunOutcome {
    RunStatus status = RunStatus::ok;
    std::string message;
    /// Step that threw (failed) or first exceeded blowup_factor (blew_up); 0 otherwise.
    std::size_t event_step = 0;
    std::vector<StepRow> rows;
    std::size_t steps = 0;
    std::size_t solve_count = 0;
    std::size_t stepping_solves = 0;
    double energy_max_rel_dev = 0.0;
    double polarised_max_rel_dev = 0.0;
    double energy_endpoint_error = 0.0;
    /// sup |U − sin(x + t)| at the last level for sine-started Airy runs; NaN otherwise.
    double exact_error = 0.0;
    std::optional<GridFunction> final_state;
};

/// Integrates one configuration; scheme failures are captured in the outcome, not thrown.
RunOutcome simulate(const ExperimentConfig& config);

/// True when shape and distance errors are meaningful (KdV started from a soliton).
bool has_soliton_diagnostics(const ExperimentConfig& config);

/// step,t,H_d,polarised_H_d,sup_norm,solve_count,shape_err,distance_err
std::string run_csv(const RunOutcome& outcome);
std::string run_summary_json(const ExperimentConfig& config, const RunOutcome& outcome);

// ---- sweeps ----

enum class SweepKind { dt, theta };

struct SweepResultRow {
    SchemeKind scheme = SchemeKind::li_cons;
    double dt = 0.0;
    double theta = 0.0;
    RunStatus status = RunStatus::ok;
    std::string message;
    std::size_t steps = 0;
    double t_final = 0.0;
    double global_error = 0.0;  ///< NaN for theta sweeps and unfinished runs
    std::size_t solve_count = 0;
    std::size_t stepping_solves = 0;
    double energy_endpoint_error = 0.0;
    double energy_trailing_drift = 0.0;
    double energy_max_rel_dev = 0.0;
    double polarised_max_rel_dev = 0.0;
    double final_sup_norm = 0.0;
    std::size_t event_step = 0;
};

struct SchemeFit {
    SchemeKind scheme = SchemeKind::li_cons;
    std::optional<double> global_error_slope;
    std::optional<double> energy_slope;
};

struct SweepOutcome {
    SweepKind kind = SweepKind::dt;
    std::vector<SweepResultRow> rows;
    std::vector<SchemeFit> fits;
    double reference_dt = 0.0;
    std::size_t failures = 0;
};

/// One row per (scheme, value) in schemes × list order; runs spread over `threads` workers.
SweepOutcome run_sweep(const ExperimentConfig& config, SweepKind kind, unsigned threads);

/// scheme,dt,theta,status,steps,t_final,global_error,solve_count,stepping_solves,energy_endpoint_error,
/// energy_trailing_drift,energy_max_rel_dev,polarised_max_rel_dev,final_sup_norm,event_step,message
std::string sweep_csv(const SweepOutcome& outcome);
std::string sweep_summary_json(const ExperimentConfig& config, const SweepOutcome& outcome);

/// POLINT_THREADS if set and positive, else the hardware concurrency.
unsigned default_threads();

/// Shortest round-trip text for a double; "nan"/"inf" for non-finite values.
std::string format_double(double v);

}  // namespace polint
