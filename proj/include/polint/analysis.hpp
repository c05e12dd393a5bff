#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polint/integrators.hpp"

namespace polint {

// ---- von Neumann analysis of the two-step θ-scheme ----

/// Roots of (1 − θτi)ζ² − 2(1 − θ)τiζ − (1 + θτi) = 0.
std::array<std::complex<double>, 2> stability_roots(double theta, double tau);

/// ½ − 1/(2τ²); throws for τ = 0.
double stability_threshold(double tau);

struct StabilityReport {
    double theta = 0.5;
    std::vector<double> tau_samples;
    std::vector<std::array<double, 2>> root_moduli;
    double max_modulus = 0.0;
    /// max |ζ| ≤ 1 + 1e−12 over the samples.
    bool stable = true;
};

StabilityReport stability_scan(double theta, std::span<const double> taus);

/// n equispaced samples of [lo, hi].
std::vector<double> linspace(double lo, double hi, std::size_t n);

/// τ of grid mode m: Δt · Im σ_D(m) · (−σ_L(m)), with σ the Fourier symbols of the skew
/// operator D and the (negative semi-definite) second-order operator L.
double discrete_tau(const DiffOp& skew, const DiffOp& second, double dt, int mode);

// ---- Airy experiment ----

struct AiryConfig {
    std::size_t n_points = 64;
    double dt = 0.01;
    double theta = 0.5;
    std::size_t n_steps = 1000;
    /// Blow-up is flagged once the sup norm exceeds this multiple of the initial one.
    double blowup_factor = 1e3;
    /// Stop at the first blow-up instead of running all steps.
    bool stop_on_blowup = true;
};

struct AiryResult {
    AiryConfig config;
    std::vector<double> sup_norm;  ///< per time level, starting with U^0
    double initial_sup = 0.0;
    bool blew_up = false;
    std::size_t blowup_step = 0;
    std::size_t steps_taken = 0;
    std::size_t solve_count = 0;
    /// Largest discrete τ over the grid modes, and ½ − 1/(2τ_max²).
    double tau_max = 0.0;
    double predicted_threshold = 0.0;
    /// |Û_m| of the final state for m = 0..N/2, and the mode where it peaks (m ≥ 2).
    std::vector<double> final_spectrum;
    int dominant_mode = 0;
    /// Mode with the largest |ζ| of the analysis for this θ and Δt.
    int fastest_predicted_mode = 0;
    /// sup |U^n − sin(x + t_n)| at the last step.
    double exact_error = 0.0;
    Eigen::VectorXd final_values;
};

/// PAVF two-step scheme for u_t + u_xxx = 0 on [0, 2π) from u(x, 0) = sin x, started with one AVF step.
AiryResult airy_experiment(const AiryConfig& config);

/// Bisection in θ on whether airy_experiment blows up within config.n_steps.
double airy_stability_boundary(AiryConfig config, double lo, double hi, double tol = 1e-3);

// ---- soliton diagnostics ----

struct SolitonErrors {
    double t = 0.0;
    double shape_err = 0.0;
    double distance_err = 0.0;
    /// The minimising translate τ*, reduced to the grid's period window.
    double shift = 0.0;
};

/// ε_shape = min_τ ‖U − Φ(· − τ)‖² and ε_distance = |argmin − ct| (mod the period), with
/// Φ the periodised soliton and ‖·‖² = Σ(·)²Δx. Coarse scan over 4N shifts, then
/// parabolic refinement.
SolitonErrors shape_distance_errors(const GridFunction& u, double t, double c, double centre = 0.0);

// ---- convergence, cost and drift ----

/// Discrete L² norm of a − b: sqrt(Σ (a − b)² Δx).
double l2_distance(const GridFunction& a, const GridFunction& b);

struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Least-squares line through (log x, log y); needs ≥ 2 points with positive values.
LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y);

/// Integrates to t_end with `steps = round(t_end/dt)`; t_end must be a whole number of steps.
std::size_t steps_for(double t_end, double dt);

/// A scheme run from `u0` to t_end.
SchemeRun run_to(SchemeKind kind, const HamiltonianSystem& sys, const GridFunction& u0, double dt, double t_end,
                 const SchemeOptions& options = {});

struct SweepRow {
    SchemeKind scheme = SchemeKind::fi_cons;
    double dt = 0.0;
    bool ok = false;
    std::string error;
    std::size_t steps = 0;
    double global_error = 0.0;
    std::size_t solve_count = 0;
    /// Solves after the starting values (li_cons only; equals solve_count otherwise).
    std::size_t stepping_solves = 0;
    /// |H_d(U^n) − H_d(U^0)| at t_end and the largest relative deviation along the run.
    double energy_endpoint_error = 0.0;
    double energy_max_rel_dev = 0.0;
    /// Largest relative deviation of the polarised H_d (li_cons); NaN otherwise.
    double polarised_max_rel_dev = 0.0;
};

/// Runs every (scheme, Δt) pair to t_end and measures the L² error against `reference`.
/// Independent runs are spread over up to `threads` workers; row order is schemes × dts.
std::vector<SweepRow> cost_accuracy_sweep(const HamiltonianSystem& sys, const GridFunction& u0,
                                          std::span<const SchemeKind> schemes, std::span<const double> dts,
                                          double t_end, const GridFunction& reference, const SchemeOptions& options = {},
                                          unsigned threads = 1);

/// Calls body(i) for i < n on up to `threads` workers; the first exception is rethrown after all finish.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

/// Solve count that `fi_rows` would need to reach `target_error`, by log-log interpolation
/// of solve_count against global_error (linear extrapolation outside the range).
double interpolated_cost(std::span<const SweepRow> fi_rows, double target_error);

struct EnergySeries {
    double dt = 0.0;
    std::vector<ConservationRecord> log;
};

struct DriftRow {
    double dt = 0.0;
    double endpoint_error = 0.0;
    double trailing_drift = 0.0;
};

struct DriftStudy {
    std::vector<DriftRow> rows;
    /// Absent when every endpoint error is at round-off level.
    std::optional<double> slope;
};

/// Largest |v − v₀|/|v₀| over the log, v the exact or polarised H_d; NaN records are skipped
/// and NaN is returned when every record is NaN.
double max_relative_deviation(std::span<const ConservationRecord> log, bool polarised);

/// |mean of e over the last 2% − mean of e over the 2% before it|, e = H_d(U^n) − H_d(U^0).
double trailing_drift(std::span<const ConservationRecord> log);

/// Endpoint energy error against Δt with its log-log slope; needs ≥ 3 runs.
DriftStudy energy_drift_study(std::span<const EnergySeries> runs);

}  // namespace polint
