#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "polint/analysis.hpp"
#include "polint/problems.hpp"
#include "test_support.hpp"

using namespace polint;

namespace {

double max_modulus(double theta, double tau) {
    const auto z = stability_roots(theta, tau);
    return std::max(std::abs(z[0]), std::abs(z[1]));
}

/// −cΦ' + Φ''' + (Φ^{p−1})' at ξ by central differences (sixth order for Φ', fourth for Φ''').
template <class F>
double travelling_residual(F phi, double xi, double c, int p = 3) {
    const double h = 1e-2;
    auto f = [&](int j) { return phi(xi + j * h); };
    const double d1 = (-f(-3) + 9 * f(-2) - 45 * f(-1) + 45 * f(1) - 9 * f(2) + f(3)) / (60 * h);
    const double d3 = (f(-3) - 8 * f(-2) + 13 * f(-1) - 13 * f(1) + 8 * f(2) - f(3)) / (8 * h * h * h);
    return -c * d1 + d3 + (p - 1) * std::pow(phi(xi), p - 2) * d1;
}

SweepRow synthetic_row(double cost, double error) {
    SweepRow r;
    r.ok = true;
    r.solve_count = static_cast<std::size_t>(cost);
    r.global_error = error;
    return r;
}

EnergySeries synthetic_series(double dt, double offset, std::size_t n) {
    EnergySeries s{dt, {}};
    for (std::size_t i = 0; i < n; ++i) {
        const double e = i == 0 ? 0.0 : offset * (1.0 + 0.1 * std::sin(0.7 * static_cast<double>(i)));
        s.log.push_back({static_cast<double>(i) * dt, -2.0 + e, std::nan("")});
    }
    return s;
}

}  // namespace

TEST_CASE("theta = 1/2 keeps both roots on the unit circle") {
    for (double tau : linspace(-50.0, 50.0, 201)) {
        const auto z = stability_roots(0.5, tau);
        CHECK(std::abs(z[0]) == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(std::abs(z[1]) == doctest::Approx(1.0).epsilon(1e-13));
    }
}

TEST_CASE("tau = 0 gives the roots of zeta^2 - 1") {
    for (double theta : {0.0, 0.3, 0.5, 1.0}) {
        const auto z = stability_roots(theta, 0.0);
        CHECK(std::abs(z[0] * z[1] + 1.0) < 1e-15);
        CHECK(std::abs(z[0] + z[1]) < 1e-15);
    }
}

TEST_CASE("roots agree with the companion-matrix eigenvalues") {
    using namespace std::complex_literals;
    for (double theta : {0.2, 0.49, 0.5, 0.8}) {
        for (double tau : {-300.0, -3.0, 0.7, 100.0}) {
            const std::complex<double> a = 1.0 - theta * tau * 1i;
            const std::complex<double> b = -2.0 * (1.0 - theta) * tau * 1i;
            const std::complex<double> c = -(1.0 + theta * tau * 1i);
            Eigen::Matrix2cd comp;
            comp << -b / a, -c / a, 1.0, 0.0;
            const Eigen::Vector2cd ev = Eigen::ComplexEigenSolver<Eigen::Matrix2cd>(comp).eigenvalues();
            const auto z = stability_roots(theta, tau);
            const double m_eig = std::max(std::abs(ev[0]), std::abs(ev[1]));
            CHECK(max_modulus(theta, tau) == doctest::Approx(m_eig).epsilon(1e-10));
            CHECK(std::abs(z[0] * z[1] - c / a) < 1e-12 * std::abs(c / a));
            CHECK(std::abs(z[0] + z[1] + b / a) < 1e-10 * (1.0 + std::abs(b / a)));
        }
    }
}

TEST_CASE("theta = 0.49 is unstable for large tau") {
    CHECK(max_modulus(0.49, 100.0) > 1.0 + 1e-6);
    CHECK_FALSE(stability_scan(0.49, linspace(-1000.0, 1000.0, 1000)).stable);
}

TEST_CASE("theta at least 1/2 is stable over a wide tau range") {
    const auto taus = linspace(-1000.0, 1000.0, 1000);
    for (double theta : {0.5, 0.6, 1.0}) {
        const auto r = stability_scan(theta, taus);
        CHECK(r.stable);
        CHECK(r.max_modulus <= 1.0 + 1e-10);
        CHECK(r.root_moduli.size() == taus.size());
    }
}

TEST_CASE("stability threshold separates stable and unstable theta") {
    for (double tau : {2.0, 10.0, 27.5}) {
        const double th = stability_threshold(tau);
        CHECK(max_modulus(th + 1e-4, tau) <= 1.0 + 1e-12);
        CHECK(max_modulus(th - 1e-4, tau) > 1.0);
        CHECK(stability_threshold(-tau) == th);
    }
    CHECK_THROWS_AS(stability_threshold(0.0), InvalidArgument);
}

TEST_CASE("discrete tau of the Airy operators") {
    const Grid1D grid = Grid1D::over(0.0, 2.0 * M_PI, 64);
    const auto ops = make_standard_ops(grid);
    const double dx = grid.dx(), dt = 0.01;
    for (int m : {0, 1, 5, 21, 31, 32}) {
        const double k = m * dx;
        const double expected = dt * (std::sin(k) / dx) * (2.0 / (dx * dx)) * (1.0 - std::cos(k));
        CHECK(discrete_tau(ops.at("d1"), ops.at("d2"), dt, m) == doctest::Approx(expected).epsilon(1e-12).scale(1.0));
    }
    CHECK(std::abs(discrete_tau(ops.at("d1"), ops.at("d2"), dt, 32)) < 1e-12);
}

TEST_CASE("soliton profile solves the travelling-wave equation") {
    for (double c : {0.5, 1.0, 2.0}) {
        const auto phi = [c](double xi) { return soliton_profile(xi, c); };
        const auto steep = [c](double xi) {
            const double s = 1.0 / std::cosh(1.5 * std::sqrt(c) * xi);
            return 1.5 * c * s * s;
        };
        double ok = 0.0, bad = 0.0;
        for (double xi : linspace(-4.0, 4.0, 33)) {
            ok = std::max(ok, std::abs(travelling_residual(phi, xi, c)));
            bad = std::max(bad, std::abs(travelling_residual(steep, xi, c)));
        }
        CHECK(ok < 1e-6);
        CHECK(bad > 0.1);
    }
    CHECK_THROWS_AS(soliton_profile(0.0, 0.0), InvalidArgument);
}

TEST_CASE("gKdV soliton profile solves its travelling-wave equation") {
    for (int p : {4, 5, 6})
        for (double c : {0.25, 1.0}) {
            double worst = 0.0;
            for (double xi : linspace(-4.0, 4.0, 33))
                worst = std::max(worst, std::abs(travelling_residual(
                                            [&](double z) { return soliton_profile(z, c, p); }, xi, c, p)));
            CHECK(worst < 1e-5);
        }
    CHECK(soliton_profile(0.0, 1.0, 4) == doctest::Approx(std::sqrt(2.0)));
    CHECK_THROWS_AS(soliton_profile(0.0, 1.0, 2), InvalidArgument);
}

TEST_CASE("periodic soliton sums the images") {
    const Grid1D grid = Grid1D::over(-5.0, 10.0, 32);
    const auto u = periodic_soliton(grid, 1.0, 1.3);
    for (std::size_t i = 0; i < grid.n_points(); ++i) {
        double s = 0.0;
        for (int j = -60; j <= 60; ++j) s += soliton_profile(grid.x(i) - 1.3 - 10.0 * j, 1.0);
        CHECK(u[i] == doctest::Approx(s).epsilon(1e-14));
    }
}

TEST_CASE("shape and distance errors vanish on the exact wave") {
    const Grid1D grid = Grid1D::over(-5.0, 10.0, 32);
    for (double shift : {0.0, 0.37, 3.1, -4.2}) {
        const auto u = periodic_soliton(grid, 1.0, shift);
        const auto e = shape_distance_errors(u, shift, 1.0);
        CHECK(e.shape_err < 1e-10);
        CHECK(e.distance_err < grid.dx() / 100.0);
        CHECK(std::abs(std::remainder(e.shift - shift, 10.0)) < grid.dx() / 100.0);
    }
}

TEST_CASE("shape error is invariant under grid translations") {
    const Grid1D grid = Grid1D::over(-5.0, 10.0, 32);
    std::mt19937_64 rng(11);
    const auto base = periodic_soliton(grid, 1.0, 0.4);
    const auto noise = polint::testing::random_smooth(grid, rng);
    const GridFunction u(grid, Eigen::VectorXd(base.values() + 0.01 * noise.values()));
    const auto e0 = shape_distance_errors(u, 0.0, 1.0);
    for (int s : {1, 5, 17}) {
        Eigen::VectorXd v(grid.n_points());
        for (std::size_t i = 0; i < grid.n_points(); ++i) v[static_cast<Eigen::Index>(grid.wrap(static_cast<long long>(i) + s))] = u[i];
        const auto e = shape_distance_errors(GridFunction(grid, v), 0.0, 1.0);
        CHECK(e.shape_err == doctest::Approx(e0.shape_err).epsilon(1e-8));
        CHECK(std::abs(std::remainder(e.shift - e0.shift - s * grid.dx(), 10.0)) < 1e-6);
    }
}

TEST_CASE("log-log fit recovers a power law") {
    const std::vector<double> x{0.1, 0.05, 0.025, 0.0125};
    std::vector<double> y;
    for (double v : x) y.push_back(3.0 * v * v);
    const auto fit = fit_loglog(x, y);
    CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    const std::vector<double> one{1.0}, neg{-1.0, 2.0}, pos{1.0, 2.0};
    CHECK_THROWS_AS(fit_loglog(one, one), InvalidArgument);
    CHECK_THROWS_AS(fit_loglog(pos, neg), InvalidArgument);
}

TEST_CASE("steps_for and l2_distance") {
    CHECK(steps_for(8.0, 0.1) == 80);
    CHECK(steps_for(8.0, 0.0125 / 64) == 40960);
    CHECK_THROWS_AS(steps_for(1.0, 0.3), InvalidArgument);
    const Grid1D grid = Grid1D::over(0.0, 2.0, 4);
    const GridFunction a(grid, Eigen::Vector4d(1, 2, 3, 4));
    const GridFunction b(grid, Eigen::Vector4d(1, 2, 3, 2));
    CHECK(l2_distance(a, b) == doctest::Approx(std::sqrt(4.0 * 0.5)));
}

TEST_CASE("cost-accuracy sweep rows") {
    const Grid1D grid = Grid1D::over(-5.0, 10.0, 32);
    const auto sys = kdv_system(grid);
    const auto u0 = periodic_soliton(grid, 1.0);
    SchemeOptions opts;
    opts.theta = 1.0;
    const auto ref = run_to(SchemeKind::fi_cons, sys, u0, 0.4 / 64, 0.4, opts).current();
    const std::vector<SchemeKind> schemes{SchemeKind::fi_cons, SchemeKind::li_cons};
    const std::vector<double> dts{0.1, 0.05};
    const auto rows = cost_accuracy_sweep(sys, u0, schemes, dts, 0.4, ref, opts, 1);
    REQUIRE(rows.size() == 4);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].ok);
        CHECK(rows[i].scheme == schemes[i / 2]);
        CHECK(rows[i].dt == dts[i % 2]);
        CHECK(rows[i].steps == steps_for(0.4, rows[i].dt));
        CHECK(rows[i].global_error > 0.0);
    }
    CHECK(rows[1].global_error < rows[0].global_error);
    CHECK(rows[0].stepping_solves == rows[0].solve_count);
    CHECK(rows[0].energy_max_rel_dev < 1e-12);
    CHECK(std::isnan(rows[0].polarised_max_rel_dev));
    CHECK(rows[2].stepping_solves == rows[2].steps - 1);
    CHECK(rows[2].polarised_max_rel_dev < 1e-12);

    const auto threaded = cost_accuracy_sweep(sys, u0, schemes, dts, 0.4, ref, opts, 3);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(threaded[i].global_error == rows[i].global_error);
        CHECK(threaded[i].solve_count == rows[i].solve_count);
    }
}

TEST_CASE("interpolated cost is exact on a power law") {
    // error = 1/cost²
    std::vector<SweepRow> rows;
    for (double cost : {100.0, 200.0, 400.0, 800.0}) rows.push_back(synthetic_row(cost, 1.0 / (cost * cost)));
    CHECK(interpolated_cost(rows, 1.0 / (300.0 * 300.0)) == doctest::Approx(300.0).epsilon(1e-10));
    CHECK(interpolated_cost(rows, 1.0 / (1600.0 * 1600.0)) == doctest::Approx(1600.0).epsilon(1e-10));
}

TEST_CASE("energy drift study") {
    std::vector<EnergySeries> runs;
    for (double dt : {0.1, 0.05, 0.025}) runs.push_back(synthetic_series(dt, 0.3 * dt * dt, 1000));
    const auto st = energy_drift_study(runs);
    REQUIRE(st.slope.has_value());
    CHECK(st.rows.size() == 3);
    CHECK(std::abs(*st.slope - 2.0) < 1e-2);
    for (const auto& r : st.rows) CHECK(r.trailing_drift < 0.1 * r.endpoint_error);

    std::vector<EnergySeries> flat;
    for (double dt : {0.1, 0.05, 0.025}) flat.push_back(synthetic_series(dt, 1e-15, 200));
    CHECK_FALSE(energy_drift_study(flat).slope.has_value());

    CHECK_THROWS_AS(energy_drift_study(std::span(runs.data(), 2)), InvalidArgument);
    std::vector<EnergySeries> shortrun{synthetic_series(0.1, 1e-3, 50), runs[1], runs[2]};
    CHECK_THROWS_AS(energy_drift_study(shortrun), InvalidArgument);
}

TEST_CASE("Airy experiment matches the generic two-step scheme") {
    AiryConfig cfg;
    cfg.n_points = 32;
    cfg.n_steps = 30;
    cfg.theta = 0.7;
    const auto res = airy_experiment(cfg);
    const Grid1D grid = Grid1D::over(0.0, 2.0 * M_PI, 32);
    SchemeOptions opts;
    opts.theta = 0.7;
    SchemeRun run(SchemeKind::li_cons, airy_system(grid), GridFunction::sample(grid, [](double x) { return std::sin(x); }),
                  cfg.dt, opts);
    run.advance(30);
    CHECK(res.steps_taken == 30);
    CHECK((res.final_values - run.current().values()).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(res.solve_count - (run.bootstrap_solve_count()) == 29);
    CHECK(res.sup_norm.size() == 31);
}

TEST_CASE("Airy instability below theta = 1/2 grows in high modes") {
    AiryConfig cfg;
    cfg.theta = 0.49;
    const auto res = airy_experiment(cfg);
    CHECK(res.blew_up);
    CHECK(res.blowup_step < 1000);
    CHECK(res.dominant_mode > 16);
    CHECK(std::abs(res.dominant_mode - res.fastest_predicted_mode) <= 3);
    CHECK(res.predicted_threshold == doctest::Approx(stability_threshold(res.tau_max)));
    CHECK(res.predicted_threshold > 0.49);

    cfg.theta = 0.5;
    cfg.n_steps = 2000;
    const auto stable = airy_experiment(cfg);
    CHECK_FALSE(stable.blew_up);
    for (double s : stable.sup_norm) CHECK(s <= 2.0 * stable.initial_sup);
}

TEST_CASE("root moduli multiply to one") {
    for (double theta : linspace(0.0, 1.0, 21))
        for (double tau : linspace(-1000.0, 1000.0, 401)) {
            const auto z = stability_roots(theta, tau);
            CHECK(std::abs(std::abs(z[0]) * std::abs(z[1]) - 1.0) < 1e-12);
        }
}

TEST_CASE("bisected Airy boundary sits at the predicted threshold") {
    AiryConfig cfg;
    cfg.n_steps = 1000;
    const double found = airy_stability_boundary(cfg, 0.4, 0.5);
    cfg.theta = 0.5;
    const double predicted = airy_experiment(cfg).predicted_threshold;
    CHECK(std::abs(found - predicted) < 0.02);
    CHECK(found < 0.5);
}
