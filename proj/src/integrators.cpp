#include "polint/integrators.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "polint/evaluation.hpp"
#include "polint/variational.hpp"

namespace polint {

SkewOp::SkewOp(DiffOp op) : op_(std::move(op)) {
    if (!op_.is_skew()) throw InvalidArgument("SkewOp: stencil is not antisymmetric");
}

Eigen::MatrixXd SkewOp::left_multiply(const Eigen::MatrixXd& m) const {
    const auto& grid = op_.grid();
    const auto n = static_cast<long long>(grid.n_points());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.rows(), m.cols());
    for (long long i = 0; i < n; ++i)
        for (const auto& [s, c] : op_.stencil()) out.row(i) += c * m.row(static_cast<Eigen::Index>(grid.wrap(i + s)));
    return out;
}

namespace {

double sup(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residual,
                            const Eigen::VectorXd& u) {
    const auto n = u.size();
    Eigen::MatrixXd j(n, n);
    Eigen::VectorXd p = u;
    for (Eigen::Index c = 0; c < n; ++c) {
        const double h = 1e-6 * (1.0 + std::abs(u[c]));
        p[c] = u[c] + h;
        const Eigen::VectorXd rp = residual(p);
        p[c] = u[c] - h;
        const Eigen::VectorXd rm = residual(p);
        p[c] = u[c];
        j.col(c) = (rp - rm) / (2.0 * h);
    }
    return j;
}

/// Newton iteration on R(U) = 0 starting from u_n; one linear solve per iteration.
StepResult newton_solve(const GridFunction& u_n, const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residual,
                        const std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>& jacobian, const NewtonConfig& cfg,
                        const char* scheme) {
    const auto& grid = u_n.grid();
    const double tol = cfg.tol_rel * (1.0 + u_n.sup_norm());
    constexpr double eps = std::numeric_limits<double>::epsilon();
    Eigen::VectorXd u = u_n.values();
    std::size_t solves = 0;
    double res = std::numeric_limits<double>::infinity();
    for (int it = 0; it <= cfg.max_iters; ++it) {
        const Eigen::VectorXd r = residual(u);
        res = sup(r);
        if (!std::isfinite(res)) break;
        if (res <= tol) return StepResult{GridFunction(grid, std::move(u)), solves, it};
        if (it == cfg.max_iters) break;
        Eigen::MatrixXd jm = cfg.fd_jacobian ? fd_jacobian(residual, u) : jacobian(u);
        const GridFunction delta = solve_linear(LinearSystem{std::move(jm), GridFunction(grid, Eigen::VectorXd(-r))}, &solves);
        u += delta.values();
        // An update at round-off size cannot reduce the residual further.
        if (sup(delta.values()) <= 4.0 * eps * (1.0 + sup(u)) && sup(residual(u)) <= 1e3 * tol)
            return StepResult{GridFunction(grid, std::move(u)), solves, it + 1};
    }
    std::ostringstream os;
    os << scheme << ": Newton did not converge in " << cfg.max_iters << " iterations (residual " << res << ", tol " << tol
       << ")";
    throw NewtonFailure(os.str(), res, cfg.max_iters);
}

void check_dt(double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("time step must be positive");
}

}  // namespace

StepResult step_fully_implicit(const HamiltonianSystem& sys, const GridFunction& u_n, double dt, const NewtonConfig& cfg) {
    check_dt(dt);
    require_same_grid(u_n.grid(), sys.grid(), "step_fully_implicit");
    const SlotPoly g = lift(sys.density);
    const Eigen::VectorXd& v = u_n.values();
    auto residual = [&](const Eigen::VectorXd& u) -> Eigen::VectorXd {
        return u - v - dt * sys.skew.apply(averaged_slot_gradient(g, 0, v, u, {v}, sys.realisation));
    };
    auto jacobian = [&](const Eigen::VectorXd& u) -> Eigen::MatrixXd {
        Eigen::MatrixXd j = -dt * sys.skew.left_multiply(averaged_slot_jacobian(g, 0, v, u, {v}, sys.realisation));
        j.diagonal().array() += 1.0;
        return j;
    };
    return newton_solve(u_n, residual, jacobian, cfg, "fi_cons");
}

StepResult step_midpoint(const HamiltonianSystem& sys, const GridFunction& u_n, double dt, const NewtonConfig& cfg) {
    check_dt(dt);
    require_same_grid(u_n.grid(), sys.grid(), "step_midpoint");
    const SlotPoly g = lift(sys.density);
    const Eigen::VectorXd& v = u_n.values();
    auto residual = [&](const Eigen::VectorXd& u) -> Eigen::VectorXd {
        SlotFields fields(sys.realisation, {0.5 * (u + v)});
        return u - v - dt * sys.skew.apply(slot_gradient(g, 0, fields));
    };
    auto jacobian = [&](const Eigen::VectorXd& u) -> Eigen::MatrixXd {
        SlotFields fields(sys.realisation, {0.5 * (u + v)});
        Eigen::MatrixXd j = -0.5 * dt * sys.skew.left_multiply(slot_hessian(g, 0, fields));
        j.diagonal().array() += 1.0;
        return j;
    };
    return newton_solve(u_n, residual, jacobian, cfg, "fi_midpoint");
}

StepResult step_naive_li(const HamiltonianSystem& sys, const GridFunction& u_n, double dt) {
    check_dt(dt);
    require_same_grid(u_n.grid(), sys.grid(), "step_naive_li");
    const auto& real = sys.realisation;
    const auto n = static_cast<Eigen::Index>(sys.grid().n_points());
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);

    // Slot 0 carries u_n, slot 1 the unknown.
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd offset = Eigen::VectorXd::Zero(n);
    SlotFields at_zero(real, {u_n.values(), zero});
    const VarDerivExpr vd = euler_operator(sys.density);
    for (const auto& term : vd.terms()) {
        SlotPoly lagged;
        for (const auto& [key, c] : term.inner.poly().terms()) {
            std::vector<Indeterminate> factors;
            for (const auto& [z, e] : key)
                for (int i = 0; i < e; ++i) factors.push_back(z);
            if (factors.size() == 1) {
                lagged.add_term(0.5 * c, {{SlotVar{0, factors[0]}, 1}});
                lagged.add_term(0.5 * c, {{SlotVar{1, factors[0]}, 1}});
                continue;
            }
            SlotPoly::Key k;
            for (std::size_t i = 0; i < factors.size(); ++i)
                k.emplace_back(SlotVar{i + 1 == factors.size() ? 1 : 0, factors[i]}, 1);
            lagged.add_term(c, std::move(k));
        }
        const DiffOp outer_t = real.op_for(term.outer).transpose();
        offset += outer_t.apply(eval_pointwise(lagged, at_zero));
        for (const auto& z : slot_indeterminates(lagged, 1)) {
            const SlotPoly coeff = lagged.partial(SlotVar{1, z});
            add_sandwich(m, real.op_for(term.outer), eval_pointwise(coeff, at_zero), real.op_for(z));
        }
    }
    // (I − Δt D M) U = u_n + Δt D offset
    Eigen::MatrixXd a = -dt * sys.skew.left_multiply(m);
    a.diagonal().array() += 1.0;
    GridFunction rhs(sys.grid(), Eigen::VectorXd(u_n.values() + dt * sys.skew.apply(offset)));
    StepResult out{GridFunction(sys.grid()), 0, 0};
    out.state = solve_linear(LinearSystem{std::move(a), std::move(rhs)}, &out.linear_solves);
    return out;
}

StepResult step_pavf(const PolarisedDensity& pd, const HamiltonianSystem& sys, std::span<const GridFunction> history,
                     double dt) {
    check_dt(dt);
    const auto k = static_cast<std::size_t>(pd.k());
    if (history.size() != k) throw InvalidArgument("step_pavf: history must hold k states");
    const AffineOperator split = pavf_affine_split(pd, history, sys.realisation);
    const double kd = static_cast<double>(k);
    // (I/(kΔt) − k D A) U^{n+k} = U^n/(kΔt) + k D b
    Eigen::MatrixXd a = -kd * sys.skew.left_multiply(split.matrix());
    a.diagonal().array() += 1.0 / (kd * dt);
    GridFunction rhs(sys.grid(), Eigen::VectorXd(history[0].values() / (kd * dt) + kd * sys.skew.apply(split.offset())));
    StepResult out{GridFunction(sys.grid()), 0, 0};
    try {
        out.state = solve_linear(LinearSystem{std::move(a), std::move(rhs)}, &out.linear_solves);
    } catch (const SingularSystem& e) {
        std::ostringstream os;
        os << e.what() << " (PAVF step with dt = " << dt << "; a smaller dt may help)";
        throw SingularSystem(os.str());
    }
    return out;
}

std::vector<GridFunction> bootstrap(const HamiltonianSystem& sys, const GridFunction& u0, double dt, int k,
                                    const NewtonConfig& cfg, std::size_t* solve_count) {
    if (k < 2) throw InvalidArgument("bootstrap: k must be at least 2");
    std::vector<GridFunction> out{u0};
    for (int j = 1; j < k; ++j) {
        auto r = step_fully_implicit(sys, out.back(), dt, cfg);
        if (solve_count) *solve_count += r.linear_solves;
        out.push_back(std::move(r.state));
    }
    return out;
}

std::string_view to_string(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::fi_cons: return "fi_cons";
        case SchemeKind::li_cons: return "li_cons";
        case SchemeKind::fi_midpoint: return "fi_midpoint";
        case SchemeKind::li_naive: return "li_naive";
    }
    return "unknown";
}

SchemeKind scheme_from_string(std::string_view name) {
    std::string s(name);
    for (auto& ch : s)
        if (ch == '-') ch = '_';
    if (s == "fi_cons") return SchemeKind::fi_cons;
    if (s == "li_cons") return SchemeKind::li_cons;
    if (s == "fi_midpoint" || s == "fi") return SchemeKind::fi_midpoint;
    if (s == "li_naive" || s == "li") return SchemeKind::li_naive;
    throw InvalidArgument("unknown scheme '" + std::string(name) + "'");
}

SchemeRun::SchemeRun(SchemeKind kind, HamiltonianSystem system, GridFunction u0, double dt, SchemeOptions options)
    : kind_(kind), system_(std::move(system)), dt_(dt), options_(std::move(options)) {
    check_dt(dt);
    require_same_grid(u0.grid(), system_.grid(), "SchemeRun");
    if (kind_ == SchemeKind::li_cons) {
        if (options_.polarisation) {
            polarisation_ = options_.polarisation;
        } else {
            const int p = system_.density.degree();
            const int k = options_.k.value_or(std::max(2, (p + 1) / 2));
            polarisation_ = polarise(system_.density, k, options_.theta);
        }
        k_ = static_cast<std::size_t>(polarisation_->k());
    }
    history_.push_back(std::move(u0));
    record();
}

void SchemeRun::record() {
    const double h = hamiltonian_d(system_.density, current(), system_.realisation);
    double ph = std::numeric_limits<double>::quiet_NaN();
    if (polarisation_ && history_.size() == k_) {
        const std::vector<GridFunction> ws(history_.begin(), history_.end());
        ph = eval_polarised(*polarisation_, ws, system_.realisation);
    }
    log_.push_back(ConservationRecord{t(), h, ph});
}

void SchemeRun::step() {
    StepResult r{GridFunction(system_.grid()), 0, 0};
    try {
        switch (kind_) {
            case SchemeKind::fi_cons: r = step_fully_implicit(system_, current(), dt_, options_.newton); break;
            case SchemeKind::fi_midpoint: r = step_midpoint(system_, current(), dt_, options_.newton); break;
            case SchemeKind::li_naive: r = step_naive_li(system_, current(), dt_); break;
            case SchemeKind::li_cons:
                if (history_.size() < k_) {
                    r = step_fully_implicit(system_, current(), dt_, options_.newton);
                    bootstrap_solves_ += r.linear_solves;
                } else {
                    const std::vector<GridFunction> hist(history_.begin(), history_.end());
                    r = step_pavf(*polarisation_, system_, hist, dt_);
                    ++pavf_steps_;
                }
                break;
        }
    } catch (const NewtonFailure& e) {
        throw NewtonFailure(std::string(e.what()) + " at step " + std::to_string(steps_ + 1), e.last_residual(),
                            e.iterations());
    } catch (const SingularSystem& e) {
        throw SingularSystem(std::string(e.what()) + " at step " + std::to_string(steps_ + 1));
    }
    solve_count_ += r.linear_solves;
    newton_log_.push_back(r.newton_iterations);
    history_.push_back(std::move(r.state));
    if (history_.size() > k_) history_.pop_front();
    ++steps_;
    record();
}

void SchemeRun::advance(std::size_t n_steps) {
    for (std::size_t i = 0; i < n_steps; ++i) step();
}

}  // namespace polint
