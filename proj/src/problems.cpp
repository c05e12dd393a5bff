#include "polint/problems.hpp"

#include <cmath>

namespace polint {

namespace {

HamiltonianSystem kdv_like(const Grid1D& grid, DensityPoly density) {
    Realisation real(grid);
    real.set(Indeterminate{1, 0}, DiffOp::forward(grid));
    return HamiltonianSystem{std::move(density), std::move(real), SkewOp(DiffOp::centered(grid))};
}

}  // namespace

HamiltonianSystem kdv_system(const Grid1D& grid) { return kdv_like(grid, gkdv_density(3)); }

HamiltonianSystem gkdv_system(const Grid1D& grid, int p) {
    if (p < 3) throw InvalidArgument("gkdv_system: p must be at least 3");
    return kdv_like(grid, gkdv_density(p));
}

HamiltonianSystem airy_system(const Grid1D& grid) { return kdv_like(grid, DensityPoly::parse("0.5*u_x^2")); }

HamiltonianSystem custom_system(const Grid1D& grid, const std::string& density) {
    return HamiltonianSystem{DensityPoly::parse(density), Realisation(grid), SkewOp(DiffOp::centered(grid))};
}

double soliton_profile(double xi, double c, int p) {
    if (!(c > 0.0)) throw InvalidArgument("soliton speed must be positive");
    if (p < 3) throw InvalidArgument("soliton_profile: p must be at least 3");
    const double amp = std::pow(0.5 * p * c, 1.0 / (p - 2));
    const double s = 1.0 / std::cosh(0.5 * (p - 2) * std::sqrt(c) * xi);
    return amp * std::pow(s, 2.0 / (p - 2));
}

GridFunction periodic_soliton(const Grid1D& grid, double c, double centre, int p) {
    if (p < 3) throw InvalidArgument("periodic_soliton: p must be at least 3");
    const double l = grid.length();
    // Φ decays like e^{−√c|ξ|} for every p, so images beyond 40/√c contribute below 1e−17 relative.
    const int images = static_cast<int>(std::ceil(40.0 / (std::sqrt(c) * l))) + 1;
    return GridFunction::sample(grid, [&](double x) {
        double xi = std::remainder(x - centre, l);
        double s = 0.0;
        for (int j = -images; j <= images; ++j) s += soliton_profile(xi - j * l, c, p);
        return s;
    });
}

}  // namespace polint
