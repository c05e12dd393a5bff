#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "polint/density.hpp"
#include "polint/grid.hpp"

namespace polint::testing {

inline GridFunction random_function(const Grid1D& grid, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    GridFunction f(grid);
    for (std::size_t i = 0; i < grid.n_points(); ++i) f[i] = dist(rng);
    return f;
}

/// A smooth periodic function with a few random Fourier modes.
inline GridFunction random_smooth(const Grid1D& grid, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    const double two_pi_over_l = 2.0 * M_PI / grid.length();
    double a[4], b[4];
    for (int m = 0; m < 4; ++m) {
        a[m] = dist(rng) / (m + 1);
        b[m] = dist(rng) / (m + 1);
    }
    const double c0 = dist(rng);
    return GridFunction::sample(grid, [&](double x) {
        double s = c0;
        for (int m = 0; m < 4; ++m) s += a[m] * std::cos((m + 1) * two_pi_over_l * x) + b[m] * std::sin((m + 1) * two_pi_over_l * x);
        return s;
    });
}

/// Up to four monomials of degree 1..max_degree in u, u_x, .., with derivative order ≤ max_order.
inline DensityPoly random_density(std::mt19937_64& rng, int max_degree = 4, int max_order = 2) {
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    std::uniform_int_distribution<int> n_terms(1, 4), degree(1, max_degree), order(0, max_order);
    DensityPoly::Poly poly;
    const int terms = n_terms(rng);
    for (int t = 0; t < terms; ++t) {
        DensityPoly::Poly::Key key;
        const int d = degree(rng);
        for (int f = 0; f < d; ++f) key.emplace_back(Indeterminate{order(rng), 0}, 1);
        poly.add_term(coeff(rng), key);
    }
    if (poly.degree() < 1) poly.add_term(1.0, {{Indeterminate{0, 0}, 2}});
    return DensityPoly(poly);
}

inline double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace polint::testing
