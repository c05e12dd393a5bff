#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "polint/density.hpp"
#include "polint/linalg.hpp"
#include "polint/polarisation.hpp"

namespace polint {

/// Constant-coefficient skew-symmetric difference operator (the discrete D).
class SkewOp {
public:
    explicit SkewOp(DiffOp op);

    const DiffOp& op() const { return op_; }
    Eigen::VectorXd apply(const Eigen::VectorXd& f) const { return op_.apply(f); }

    /// D·M computed row-wise from the stencil.
    Eigen::MatrixXd left_multiply(const Eigen::MatrixXd& m) const;

private:
    DiffOp op_;
};

/// u_t = D δH/δu with polynomial density and its grid realisation.
struct HamiltonianSystem {
    DensityPoly density;
    Realisation realisation;
    SkewOp skew;

    const Grid1D& grid() const { return realisation.grid(); }
};

struct NewtonConfig {
    /// Converged when ‖U − u_n − Δt·D·(DVD)‖∞ ≤ tol_rel · (1 + ‖u_n‖∞).
    double tol_rel = 1e-13;
    int max_iters = 200;
    /// Debug cross-check: finite-difference Jacobian instead of the analytic one.
    bool fd_jacobian = false;
};

struct StepResult {
    GridFunction state;
    std::size_t linear_solves = 0;
    int newton_iterations = 0;
};

/// Discrete-gradient step (U − u_n)/Δt = D_d · avf_dvd(u_n, U), solved by Newton.
StepResult step_fully_implicit(const HamiltonianSystem& sys, const GridFunction& u_n, double dt,
                               const NewtonConfig& cfg = {});

/// Implicit midpoint: (U − u_n)/Δt = D_d · (δH_d/δu)((U + u_n)/2).
StepResult step_midpoint(const HamiltonianSystem& sys, const GridFunction& u_n, double dt, const NewtonConfig& cfg = {});

/// Lagged-nonlinearity step: linear parts averaged, one factor of each nonlinear term taken at U.
StepResult step_naive_li(const HamiltonianSystem& sys, const GridFunction& u_n, double dt);

/// One PAVF step from history U^n..U^{n+k−1}; exactly one linear solve.
StepResult step_pavf(const PolarisedDensity& pd, const HamiltonianSystem& sys, std::span<const GridFunction> history,
                     double dt);

/// Starting values U^0..U^{k−1}, the later ones by fully implicit steps of size Δt.
std::vector<GridFunction> bootstrap(const HamiltonianSystem& sys, const GridFunction& u0, double dt, int k,
                                    const NewtonConfig& cfg = {}, std::size_t* solve_count = nullptr);

enum class SchemeKind { fi_cons, li_cons, fi_midpoint, li_naive };

std::string_view to_string(SchemeKind kind);
SchemeKind scheme_from_string(std::string_view name);

struct SchemeOptions {
    double theta = 0.5;
    /// Number of polarisation arguments; defaults to max(2, ⌈p/2⌉).
    std::optional<int> k;
    /// Overrides the generic polarisation of the density.
    std::optional<PolarisedDensity> polarisation;
    NewtonConfig newton;
};

struct ConservationRecord {
    double t;
    double hamiltonian;
    /// Polarised H_d over the latest k states; NaN for one-step schemes or before bootstrap ends.
    double polarised;
};

/// Time-stepping state for one scheme on one initial condition.
class SchemeRun {
public:
    SchemeRun(SchemeKind kind, HamiltonianSystem system, GridFunction u0, double dt, SchemeOptions options = {});

    /// Advances by one time level; failures propagate with the step index in the message.
    void step();
    void advance(std::size_t n_steps);

    SchemeKind kind() const { return kind_; }
    double t() const { return t0_ + static_cast<double>(steps_) * dt_; }
    double dt() const { return dt_; }
    std::size_t step_count() const { return steps_; }
    const GridFunction& current() const { return history_.back(); }
    const std::deque<GridFunction>& history() const { return history_; }
    const HamiltonianSystem& system() const { return system_; }

    std::size_t solve_count() const { return solve_count_; }
    /// Solves spent on the starting values (part of solve_count).
    std::size_t bootstrap_solve_count() const { return bootstrap_solves_; }
    /// Number of PAVF steps taken (zero for other schemes).
    std::size_t pavf_step_count() const { return pavf_steps_; }
    const std::vector<int>& newton_iters_log() const { return newton_log_; }
    const std::vector<ConservationRecord>& conservation_log() const { return log_; }

    const std::optional<PolarisedDensity>& polarisation() const { return polarisation_; }
    std::size_t history_length() const { return k_; }

private:
    void record();

    SchemeKind kind_;
    HamiltonianSystem system_;
    double dt_;
    double t0_ = 0.0;
    SchemeOptions options_;
    std::optional<PolarisedDensity> polarisation_;
    std::size_t k_ = 1;
    std::deque<GridFunction> history_;
    std::size_t steps_ = 0;
    std::size_t solve_count_ = 0;
    std::size_t bootstrap_solves_ = 0;
    std::size_t pavf_steps_ = 0;
    std::vector<int> newton_log_;
    std::vector<ConservationRecord> log_;
};

}  // namespace polint
