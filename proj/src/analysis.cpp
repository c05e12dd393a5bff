#include "polint/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "polint/problems.hpp"
#include "polint/variational.hpp"

namespace polint {

std::array<std::complex<double>, 2> stability_roots(double theta, double tau) {
    using namespace std::complex_literals;
    const std::complex<double> a = 1.0 - theta * tau * 1i;
    const std::complex<double> b = -2.0 * (1.0 - theta) * tau * 1i;
    const std::complex<double> c = -(1.0 + theta * tau * 1i);
    const std::complex<double> disc = std::sqrt(b * b - 4.0 * a * c);
    // Pick the sign that avoids cancellation, then recover the other root from the product c/a.
    const std::complex<double> q = -0.5 * (std::real(std::conj(b) * disc) >= 0.0 ? b + disc : b - disc);
    const std::complex<double> z1 = q / a;
    const std::complex<double> z2 = c / q;
    return {z1, z2};
}

double stability_threshold(double tau) {
    if (tau == 0.0 || !std::isfinite(tau)) throw InvalidArgument("stability_threshold: tau must be finite and nonzero");
    return 0.5 - 1.0 / (2.0 * tau * tau);
}

StabilityReport stability_scan(double theta, std::span<const double> taus) {
    StabilityReport r;
    r.theta = theta;
    r.tau_samples.assign(taus.begin(), taus.end());
    for (double tau : taus) {
        const auto z = stability_roots(theta, tau);
        r.root_moduli.push_back({std::abs(z[0]), std::abs(z[1])});
        r.max_modulus = std::max({r.max_modulus, std::abs(z[0]), std::abs(z[1])});
    }
    r.stable = r.max_modulus <= 1.0 + 1e-12;
    return r;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}

double discrete_tau(const DiffOp& skew, const DiffOp& second, double dt, int mode) {
    const double k = 2.0 * M_PI * mode / skew.grid().length();
    return dt * skew.symbol(k).imag() * -second.symbol(k).real();
}

namespace {

std::vector<double> half_spectrum(const GridFunction& u) {
    const std::size_t n = u.size();
    std::vector<double> out(n / 2 + 1);
    for (std::size_t m = 0; m < out.size(); ++m) {
        std::complex<double> s = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            s += u[j] * std::polar(1.0, -2.0 * M_PI * static_cast<double>(m * j % n) / static_cast<double>(n));
        out[m] = std::abs(s) / static_cast<double>(n);
    }
    return out;
}

}  // namespace

AiryResult airy_experiment(const AiryConfig& config) {
    if (!(config.theta >= 0.0 && config.theta <= 1.0)) throw InvalidArgument("airy_experiment: theta must lie in [0, 1]");
    const Grid1D grid = Grid1D::over(0.0, 2.0 * M_PI, config.n_points);
    const HamiltonianSystem sys = airy_system(grid);
    const PolarisedDensity pd = polarise(sys.density, 2, config.theta);
    const double dt = config.dt;
    AiryResult res;
    res.config = config;
    const auto d2 = make_standard_ops(grid).at("d2");
    for (int m = 0; m <= static_cast<int>(grid.n_points() / 2); ++m) {
        const double tau = discrete_tau(sys.skew.op(), d2, dt, m);
        res.tau_max = std::max(res.tau_max, std::abs(tau));
    }
    res.predicted_threshold = stability_threshold(res.tau_max);
    double worst = 0.0;
    for (int m = 0; m <= static_cast<int>(grid.n_points() / 2); ++m) {
        const auto z = stability_roots(config.theta, discrete_tau(sys.skew.op(), d2, dt, m));
        const double mod = std::max(std::abs(z[0]), std::abs(z[1]));
        if (mod > worst + 1e-14) {
            worst = mod;
            res.fastest_predicted_mode = m;
        }
    }

    std::vector<GridFunction> hist = bootstrap(sys, GridFunction::sample(grid, [](double x) { return std::sin(x); }), dt, 2,
                                               {}, &res.solve_count);
    res.initial_sup = hist[0].sup_norm();
    res.sup_norm = {hist[0].sup_norm(), hist[1].sup_norm()};

    // The quadratic density makes the PAVF matrix independent of the history: factor it once.
    const AffineOperator split0 = pavf_affine_split(pd, hist, sys.realisation);
    Eigen::MatrixXd a = -2.0 * sys.skew.left_multiply(split0.matrix());
    a.diagonal().array() += 1.0 / (2.0 * dt);
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    const GridFunction zero(grid);

    auto blown = [&](double s) { return !std::isfinite(s) || s > config.blowup_factor * res.initial_sup; };
    res.steps_taken = 1;
    for (std::size_t step = 2; step <= config.n_steps; ++step) {
        const std::array ws{hist[0], hist[1], zero};
        const Eigen::VectorXd b = pavf_dvd(pd, ws, sys.realisation).values();
        const Eigen::VectorXd rhs = hist[0].values() / (2.0 * dt) + 2.0 * sys.skew.apply(b);
        GridFunction next(grid, Eigen::VectorXd(lu.solve(rhs)));
        ++res.solve_count;
        hist[0] = std::move(hist[1]);
        hist[1] = std::move(next);
        res.steps_taken = step;
        const double s = hist[1].sup_norm();
        res.sup_norm.push_back(s);
        if (!res.blew_up && blown(s)) {
            res.blew_up = true;
            res.blowup_step = step;
            if (config.stop_on_blowup) break;
        }
    }
    if (!res.blew_up && blown(res.sup_norm[1])) {
        res.blew_up = true;
        res.blowup_step = 1;
    }

    res.final_values = hist[1].values();
    const double t_final = static_cast<double>(res.steps_taken) * dt;
    const auto exact = GridFunction::sample(grid, [t_final](double x) { return std::sin(x + t_final); });
    res.exact_error = (hist[1] - exact).sup_norm();
    res.final_spectrum = half_spectrum(hist[1]);
    double peak = -1.0;
    for (std::size_t m = 2; m < res.final_spectrum.size(); ++m)
        if (res.final_spectrum[m] > peak) {
            peak = res.final_spectrum[m];
            res.dominant_mode = static_cast<int>(m);
        }
    return res;
}

double airy_stability_boundary(AiryConfig config, double lo, double hi, double tol) {
    config.stop_on_blowup = true;
    auto unstable = [&](double theta) {
        config.theta = theta;
        return airy_experiment(config).blew_up;
    };
    if (!unstable(lo) || unstable(hi))
        throw InvalidArgument("airy_stability_boundary: need an unstable lower and a stable upper theta");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (unstable(mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

SolitonErrors shape_distance_errors(const GridFunction& u, double t, double c, double centre) {
    const Grid1D& grid = u.grid();
    const double l = grid.length();
    auto misfit = [&](double tau) { return std::pow(l2_distance(u, periodic_soliton(grid, c, tau)), 2); };

    const std::size_t n_scan = 4 * grid.n_points();
    const double h = l / static_cast<double>(n_scan);
    double best_tau = grid.left();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n_scan; ++j) {
        const double tau = grid.left() + h * static_cast<double>(j);
        const double f = misfit(tau);
        if (f < best) {
            best = f;
            best_tau = tau;
        }
    }
    // Three-point parabolic steps on a shrinking bracket.
    double s = h;
    for (int it = 0; it < 80 && s > 1e-11 * l; ++it) {
        const double fm = misfit(best_tau - s), f0 = misfit(best_tau), fp = misfit(best_tau + s);
        const double curv = fm - 2.0 * f0 + fp;
        double step = 0.0;
        if (curv > 0.0) step = std::clamp(0.5 * s * (fm - fp) / curv, -s, s);
        else step = fm < fp ? -s : (fp < f0 ? s : 0.0);
        best_tau += step;
        // A clamped step means the minimum lies outside the bracket: keep its width.
        if (std::abs(step) < s) s *= 0.5;
    }
    SolitonErrors out;
    out.t = t;
    out.shape_err = misfit(best_tau);
    out.shift = grid.left() + std::fmod(std::fmod(best_tau - grid.left(), l) + l, l);
    const double d = std::remainder(best_tau - centre - c * t, l);
    out.distance_err = std::abs(d);
    return out;
}

double l2_distance(const GridFunction& a, const GridFunction& b) {
    require_same_grid(a.grid(), b.grid(), "l2_distance");
    return std::sqrt((a.values() - b.values()).squaredNorm() * a.grid().dx());
}

LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("fit_loglog: need at least two matching points");
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidArgument("fit_loglog: values must be positive");
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double den = n * sxx - sx * sx;
    if (den == 0.0) throw InvalidArgument("fit_loglog: x values coincide");
    LogLogFit f;
    f.slope = (n * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / n;
    return f;
}

std::size_t steps_for(double t_end, double dt) {
    if (!(dt > 0.0) || !(t_end >= dt)) throw InvalidArgument("need dt > 0 and t_end >= dt");
    const double ratio = t_end / dt;
    const double steps = std::round(ratio);
    if (std::abs(ratio - steps) > 1e-9 * ratio) {
        std::ostringstream os;
        os << "t_end = " << t_end << " is not a whole number of steps of dt = " << dt;
        throw InvalidArgument(os.str());
    }
    return static_cast<std::size_t>(steps);
}

SchemeRun run_to(SchemeKind kind, const HamiltonianSystem& sys, const GridFunction& u0, double dt, double t_end,
                 const SchemeOptions& options) {
    SchemeRun run(kind, sys, u0, dt, options);
    run.advance(steps_for(t_end, dt));
    return run;
}

double max_relative_deviation(std::span<const ConservationRecord> log, bool polarised) {
    double ref = std::numeric_limits<double>::quiet_NaN();
    double worst = 0.0;
    for (const auto& r : log) {
        const double v = polarised ? r.polarised : r.hamiltonian;
        if (std::isnan(v)) continue;
        if (std::isnan(ref)) ref = v;
        worst = std::max(worst, std::abs(v - ref) / std::max(std::abs(ref), 1e-300));
    }
    return std::isnan(ref) ? std::numeric_limits<double>::quiet_NaN() : worst;
}

namespace {

SweepRow sweep_one(SchemeKind kind, double dt, const HamiltonianSystem& sys, const GridFunction& u0, double t_end,
                   const GridFunction& reference, const SchemeOptions& options) {
    SweepRow row;
    row.scheme = kind;
    row.dt = dt;
    try {
        SchemeRun run = run_to(kind, sys, u0, dt, t_end, options);
        row.steps = run.step_count();
        row.global_error = l2_distance(run.current(), reference);
        row.solve_count = run.solve_count();
        row.stepping_solves = run.solve_count() - run.bootstrap_solve_count();
        const auto& log = run.conservation_log();
        row.energy_endpoint_error = std::abs(log.back().hamiltonian - log.front().hamiltonian);
        row.energy_max_rel_dev = max_relative_deviation(log, false);
        row.polarised_max_rel_dev = kind == SchemeKind::li_cons ? max_relative_deviation(log, true)
                                                                : std::numeric_limits<double>::quiet_NaN();
        row.ok = std::isfinite(row.global_error);
        if (!row.ok) row.error = "non-finite solution";
    } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
    }
    return row;
}

}  // namespace

std::vector<SweepRow> cost_accuracy_sweep(const HamiltonianSystem& sys, const GridFunction& u0,
                                          std::span<const SchemeKind> schemes, std::span<const double> dts,
                                          double t_end, const GridFunction& reference, const SchemeOptions& options,
                                          unsigned threads) {
    std::vector<SweepRow> rows(schemes.size() * dts.size());
    parallel_for(rows.size(), threads, [&](std::size_t i) {
        rows[i] = sweep_one(schemes[i / dts.size()], dts[i % dts.size()], sys, u0, t_end, reference, options);
    });
    return rows;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const unsigned n_threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(std::max<std::size_t>(n, 1)));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

double interpolated_cost(std::span<const SweepRow> fi_rows, double target_error) {
    std::vector<std::pair<double, double>> pts;  // (log error, log cost)
    for (const auto& r : fi_rows)
        if (r.ok && r.global_error > 0.0 && r.solve_count > 0)
            pts.emplace_back(std::log(r.global_error), std::log(static_cast<double>(r.solve_count)));
    if (pts.size() < 2) throw InvalidArgument("interpolated_cost: need two successful rows");
    std::sort(pts.begin(), pts.end());
    const double le = std::log(target_error);
    std::size_t i = 1;
    while (i + 1 < pts.size() && pts[i].first < le) ++i;
    const auto& [x0, y0] = pts[i - 1];
    const auto& [x1, y1] = pts[i];
    return std::exp(y0 + (y1 - y0) * (le - x0) / (x1 - x0));
}

namespace {

double window_mean(std::span<const ConservationRecord> log, std::size_t from, std::size_t to, double h0) {
    double s = 0.0;
    for (std::size_t i = from; i < to; ++i) s += log[i].hamiltonian - h0;
    return s / static_cast<double>(to - from);
}

}  // namespace

double trailing_drift(std::span<const ConservationRecord> log) {
    const std::size_t n = log.size();
    if (n < 2) return 0.0;
    const std::size_t w = std::max<std::size_t>(1, n / 50);
    if (n < 2 * w) return 0.0;
    const double h0 = log.front().hamiltonian;
    return std::abs(window_mean(log, n - w, n, h0) - window_mean(log, n - 2 * w, n - w, h0));
}

DriftStudy energy_drift_study(std::span<const EnergySeries> runs) {
    if (runs.size() < 3) throw InvalidArgument("energy_drift_study: need at least three runs");
    DriftStudy out;
    std::vector<double> dts, errs;
    bool all_roundoff = true;
    for (const auto& run : runs) {
        if (run.log.size() < 100) throw InvalidArgument("energy_drift_study: runs need at least 100 records");
        const double h0 = run.log.front().hamiltonian;
        DriftRow row;
        row.dt = run.dt;
        row.endpoint_error = std::abs(run.log.back().hamiltonian - h0);
        row.trailing_drift = trailing_drift(run.log);
        if (row.endpoint_error > 1e-11 * std::max(std::abs(h0), 1.0)) all_roundoff = false;
        dts.push_back(row.dt);
        errs.push_back(row.endpoint_error);
        out.rows.push_back(row);
    }
    if (!all_roundoff) out.slope = fit_loglog(dts, errs).slope;
    return out;
}

}  // namespace polint
