#include <array>
#include <cmath>

#include "doctest.h"
#include "polint/variational.hpp"
#include "test_support.hpp"

using namespace polint;
using polint::testing::random_density;
using polint::testing::random_smooth;

namespace {

const Indeterminate ux{1, 0};

/// Relative to the larger sup norm, with an absolute floor of 1 for vanishing derivatives.
double rel_sup_diff(const GridFunction& a, const GridFunction& b) {
    const double scale = std::max({a.sup_norm(), b.sup_norm(), 1.0});
    return (a - b).sup_norm() / scale;
}

GridFunction pointwise(const GridFunction& a, const GridFunction& b) {
    return GridFunction(a.grid(), Eigen::VectorXd(a.values().cwiseProduct(b.values())));
}

Realisation forward_realisation(const Grid1D& grid) {
    Realisation real(grid);
    real.set(ux, DiffOp::forward(grid));
    return real;
}

}  // namespace

TEST_CASE("AVF DVD of KdV gives the cubic-average nonlinearity") {
    std::mt19937_64 rng(31);
    const Grid1D grid = Grid1D::over(-5.0, 10.0, 32);
    const auto real = forward_realisation(grid);
    const auto d2 = make_standard_ops(grid).at("d2");
    const auto density = DensityPoly::parse("0.5*u_x^2 - (1/3)*u^3");
    for (int trial = 0; trial < 5; ++trial) {
        const auto u = random_smooth(grid, rng), v = random_smooth(grid, rng);
        // −δ⟨2⟩(u + v)/2 − (u² + uv + v²)/3, so that D = δ⟨1⟩ gives the fully implicit KdV scheme.
        const auto want = -0.5 * d2.apply(u + v) - (1.0 / 3.0) * (pointwise(u, u) + pointwise(u, v) + pointwise(v, v));
        CHECK(rel_sup_diff(avf_dvd(density, v, u, real), want) <= 1e-13);
    }
}

TEST_CASE("AVF DVD is consistent and satisfies the difference identity") {
    std::mt19937_64 rng(37);
    const Grid1D grid = Grid1D::over(0.0, 2.0 * M_PI, 20);
    const Realisation real(grid);
    for (int trial = 0; trial < 100; ++trial) {
        const auto g = random_density(rng);
        const auto u = random_smooth(grid, rng, 0.8), v = random_smooth(grid, rng, 0.8);
        CAPTURE(g.to_string());
        CHECK(rel_sup_diff(avf_dvd(g, u, u, real), euler_operator(g).evaluate(u, real)) <= 1e-12);
        const double hu = hamiltonian_d(g, u, real), hv = hamiltonian_d(g, v, real);
        const double lhs = hu - hv;
        const double rhs = inner(avf_dvd(g, v, u, real), u - v) * grid.dx();
        CHECK(std::abs(lhs - rhs) <= 1e-11 * std::max({std::abs(hu), std::abs(hv), 1.0}));
    }
}

TEST_CASE("AVF Jacobian matches finite differences") {
    std::mt19937_64 rng(41);
    const Grid1D grid = Grid1D::over(0.0, 1.0, 12);
    const Realisation real(grid);
    for (int trial = 0; trial < 10; ++trial) {
        const auto g = random_density(rng);
        const auto u = random_smooth(grid, rng, 0.8), v = random_smooth(grid, rng, 0.8);
        const Eigen::MatrixXd jac = avf_dvd_jacobian(g, v, u, real);
        Eigen::MatrixXd fd(grid.n_points(), grid.n_points());
        const double h = 1e-6;
        for (std::size_t j = 0; j < grid.n_points(); ++j) {
            GridFunction up = u, um = u;
            up[j] += h;
            um[j] -= h;
            fd.col(static_cast<Eigen::Index>(j)) = (avf_dvd(g, v, up, real) - avf_dvd(g, v, um, real)).values() / (2 * h);
        }
        const double scale = std::max(1.0, jac.cwiseAbs().maxCoeff());
        CHECK((jac - fd).cwiseAbs().maxCoeff() <= 1e-6 * scale);
    }
}

TEST_CASE("Furihata type 1 closed form equals the AVF DVD") {
    std::mt19937_64 rng(43);
    const Grid1D grid = Grid1D::over(0.0, 2.0 * M_PI, 24);
    const Realisation real(grid);
    std::uniform_int_distribution<int> order(0, 2);
    for (int trial = 0; trial < 50; ++trial) {
        const int j = order(rng), k = order(rng);
        DensityPoly::Poly poly;
        poly.add_term(1.0, {{Indeterminate{j, 0}, 1}, {Indeterminate{k, 0}, 1}});
        const DensityPoly g(poly);
        const auto u = random_smooth(grid, rng), v = random_smooth(grid, rng);
        CAPTURE(j);
        CAPTURE(k);
        CHECK(rel_sup_diff(furihata_dvd_type1(j, k, v, u, real), avf_dvd(g, v, u, real)) <= 1e-11);
        CHECK(rel_sup_diff(furihata_dvd_type1(j, k, u, u, real), euler_operator(g).evaluate(u, real)) <= 1e-12);
    }
}

TEST_CASE("Furihata type 1 for the squared derivative") {
    // Density u_x² (no ½): 2·δ⟨1⟩ᵀδ⟨1⟩ (u + v)/2 = −δ⟨1⟩δ⟨1⟩(u + v).
    std::mt19937_64 rng(47);
    const Grid1D grid = Grid1D::over(0.0, 2.0 * M_PI, 16);
    const Realisation real(grid);
    const auto d1 = DiffOp::centered(grid);
    const auto u = random_smooth(grid, rng), v = random_smooth(grid, rng);
    CHECK(rel_sup_diff(furihata_dvd_type1(1, 1, v, u, real), -1.0 * d1.apply(d1.apply(u + v))) <= 1e-13);
}

TEST_CASE("Furihata type 2 closed form equals the AVF DVD") {
    std::mt19937_64 rng(53);
    const Grid1D grid = Grid1D::over(0.0, 2.0 * M_PI, 24);
    const Realisation real(grid);
    struct Case {
        ScalarFunction g;
        int power;
    };
    const std::array cases{
        Case{{[](double z) { return z * z; }, [](double z) { return 2 * z; }}, 2},
        Case{{[](double z) { return z * z * z; }, [](double z) { return 3 * z * z; }}, 3},
        Case{{[](double z) { return z * z * z * z; }, [](double z) { return 4 * z * z * z; }}, 4},
    };
    for (const auto& c : cases)
        for (int j = 0; j <= 2; ++j) {
            DensityPoly::Poly poly;
            poly.add_term(1.0, {{Indeterminate{j, 0}, c.power}});
            const DensityPoly g(poly);
            for (int trial = 0; trial < 10; ++trial) {
                const auto u = random_smooth(grid, rng), v = random_smooth(grid, rng);
                CAPTURE(c.power);
                CAPTURE(j);
                CHECK(rel_sup_diff(furihata_dvd_type2(c.g, j, v, u, real), avf_dvd(g, v, u, real)) <= 1e-11);
                // u = v takes the g′ branch.
                CHECK(rel_sup_diff(furihata_dvd_type2(c.g, j, u, u, real), euler_operator(g).evaluate(u, real)) <= 1e-13);
            }
        }
    // g(z) = z² with J = 1 is the type 1 density u_x².
    const auto u = random_smooth(grid, rng), v = random_smooth(grid, rng);
    CHECK(rel_sup_diff(furihata_dvd_type2(cases[0].g, 1, v, u, real), furihata_dvd_type1(1, 1, v, u, real)) <= 1e-13);
}

TEST_CASE("PAVF DVD of polarised KdV") {
    std::mt19937_64 rng(59);
    const Grid1D grid = Grid1D::over(-5.0, 10.0, 32);
    const auto real = forward_realisation(grid);
    const auto d2 = make_standard_ops(grid).at("d2");
    const auto pd = polarise(DensityPoly::parse("0.5*u_x^2 - (1/3)*u^3"), 2, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        const auto a = random_smooth(grid, rng), b = random_smooth(grid, rng), c = random_smooth(grid, rng);
        // −¼δ⟨2⟩(U^n + U^{n+2}) − ⅙U^{n+1}(U^n + U^{n+1} + U^{n+2}); times k = 2 under δ⟨1⟩ this is the
        // linearly implicit KdV scheme.
        const auto want = -0.25 * d2.apply(a + c) - (1.0 / 6.0) * pointwise(b, a + b + c);
        const std::array ws{a, b, c};
        CHECK(rel_sup_diff(pavf_dvd(pd, ws, real), want) <= 1e-13);
    }
}

TEST_CASE("PAVF DVD of even-power gKdV") {
    std::mt19937_64 rng(61);
    const Grid1D grid = Grid1D::over(0.0, 2.0 * M_PI, 20);
    const auto real = forward_realisation(grid);
    const auto d2 = make_standard_ops(grid).at("d2");
    {
        const auto pd = polarise_gkdv(4, 1.0);
        const auto a = random_smooth(grid, rng), b = random_smooth(grid, rng), c = random_smooth(grid, rng);
        const auto want = -0.25 * d2.apply(a + c) - 0.25 * pointwise(pointwise(b, b), a + c);
        const std::array ws{a, b, c};
        CHECK(rel_sup_diff(pavf_dvd(pd, ws, real), want) <= 1e-13);
    }
    {
        const auto pd = polarise_gkdv(6, 0.5);
        const auto a = random_smooth(grid, rng), b = random_smooth(grid, rng), c = random_smooth(grid, rng),
                   d = random_smooth(grid, rng);
        const auto want = -(1.0 / 6.0) * d2.apply(a + d) - (1.0 / 6.0) * pointwise(pointwise(pointwise(b, b), pointwise(c, c)), a + d);
        const std::array ws{a, b, c, d};
        CHECK(rel_sup_diff(pavf_dvd(pd, ws, real), want) <= 1e-13);
    }
}

TEST_CASE("PAVF DVD consistency and telescoping") {
    std::mt19937_64 rng(67);
    const Grid1D grid = Grid1D::over(0.0, 2.0 * M_PI, 18);
    const Realisation real(grid);
    for (int trial = 0; trial < 100; ++trial) {
        const auto g = random_density(rng);
        const int k = std::max(2, (g.degree() + 1) / 2) + trial % 2;
        const auto pd = polarise(g, k, (trial % 5) / 4.0);
        std::vector<GridFunction> ws;
        for (int i = 0; i <= k; ++i) ws.push_back(random_smooth(grid, rng, 0.8));
        CAPTURE(g.to_string());
        CAPTURE(k);

        const std::vector<GridFunction> same(static_cast<std::size_t>(k + 1), ws[0]);
        const auto consistent = static_cast<double>(k) * pavf_dvd(pd, same, real);
        CHECK(rel_sup_diff(consistent, euler_operator(g).evaluate(ws[0], real)) <= 1e-12);

        const std::span<const GridFunction> all(ws);
        const double h_new = eval_polarised(pd, all.subspan(1), real);
        const double h_old = eval_polarised(pd, all.first(static_cast<std::size_t>(k)), real);
        const double rhs = inner(pavf_dvd(pd, all, real), ws.back() - ws.front()) * grid.dx();
        CHECK(std::abs((h_new - h_old) - rhs) <= 1e-11 * std::max({std::abs(h_new), std::abs(h_old), 1.0}));
    }
}

TEST_CASE("PAVF affine split") {
    std::mt19937_64 rng(71);
    const Grid1D grid = Grid1D::over(0.0, 2.0 * M_PI, 16);
    const Realisation real(grid);

    SUBCASE("round trip and superposition") {
        for (int trial = 0; trial < 20; ++trial) {
            const auto g = random_density(rng);
            const int k = std::max(2, (g.degree() + 1) / 2);
            const auto pd = polarise(g, k, 0.5);
            std::vector<GridFunction> known;
            for (int i = 0; i < k; ++i) known.push_back(random_smooth(grid, rng, 0.8));
            const auto split = pavf_affine_split(pd, known, real);
            CAPTURE(g.to_string());
            CAPTURE(k);
            auto with = [&](const GridFunction& w) {
                auto ws = known;
                ws.push_back(w);
                return pavf_dvd(pd, ws, real);
            };
            const auto w1 = random_smooth(grid, rng), w2 = random_smooth(grid, rng);
            CHECK(rel_sup_diff(split.apply(w1), with(w1)) <= 1e-13);
            const auto second = with(w1 + w2) - with(w1) - with(w2) + with(GridFunction(grid));
            CHECK(second.sup_norm() <= 1e-12 * std::max(1.0, with(w1).sup_norm()));
        }
    }
    SUBCASE("quadratic term gives a scaled identity") {
        for (double theta : {0.0, 0.5, 1.0}) {
            const auto pd = polarise(DensityPoly::parse("0.5*u^2"), 2, theta);
            const std::array known{random_smooth(grid, rng), random_smooth(grid, rng)};
            const auto split = pavf_affine_split(pd, known, real);
            const Eigen::MatrixXd want = (theta / 4) * Eigen::MatrixXd::Identity(16, 16);
            CHECK((split.matrix() - want).cwiseAbs().maxCoeff() <= 1e-15);
        }
    }
    SUBCASE("polarised KdV matrix has bandwidth two") {
        const auto pd = polarise(DensityPoly::parse("0.5*u_x^2 - (1/3)*u^3"), 2, 0.5);
        const std::array known{random_smooth(grid, rng), random_smooth(grid, rng)};
        const auto m = pavf_affine_split(pd, known, real).matrix();
        const long n = 16;
        for (long i = 0; i < n; ++i)
            for (long j = 0; j < n; ++j) {
                const long dist = std::min((i - j + n) % n, (j - i + n) % n);
                if (dist > 2) CHECK(m(i, j) == 0.0);
            }
        CHECK(m(0, 2) != 0.0);
    }
    SUBCASE("non-quadratic slot is rejected") {
        const PolarisedDensity cubic_slot(2, 0.5, lift(DensityPoly::parse("u^3"), 0));
        const std::array known{GridFunction(grid), GridFunction(grid)};
        CHECK_THROWS_AS(pavf_affine_split(cubic_slot, known, real), InvalidArgument);
    }
}
