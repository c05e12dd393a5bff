#pragma once

#include <functional>
#include <span>

#include <Eigen/Dense>

#include "polint/density.hpp"
#include "polint/polarisation.hpp"

namespace polint {

/// x ↦ matrix·x + offset.
class AffineOperator {
public:
    AffineOperator(const Grid1D& grid, Eigen::MatrixXd matrix, Eigen::VectorXd offset);

    const Eigen::MatrixXd& matrix() const { return matrix_; }
    const Eigen::VectorXd& offset() const { return offset_; }
    const Grid1D& grid() const { return grid_; }

    GridFunction apply(const GridFunction& x) const;

private:
    Grid1D grid_;
    Eigen::MatrixXd matrix_;
    Eigen::VectorXd offset_;
};

/// AVF discrete variational derivative ∫₀¹ (δH_d/δu)[ξu + (1−ξ)v] dξ, integrated exactly in ξ.
GridFunction avf_dvd(const DensityPoly& density, const GridFunction& v, const GridFunction& u,
                     const Realisation& realisation);

/// d/du of avf_dvd(density, v, u), assembled dense.
Eigen::MatrixXd avf_dvd_jacobian(const DensityPoly& density, const GridFunction& v, const GridFunction& u,
                                 const Realisation& realisation);

/// Closed-form DVD of the density δ_J u · δ_K u: (δ_J^T δ_K + δ_K^T δ_J)((u + v)/2).
GridFunction furihata_dvd_type1(int J, int K, const GridFunction& v, const GridFunction& u,
                                const Realisation& realisation);

/// A scalar function together with its derivative.
struct ScalarFunction {
    std::function<double(double)> value;
    std::function<double(double)> derivative;
};

/// Closed-form DVD of the density g(δ_J u): δ_J^T [(g(a) − g(b)) / (a − b)] with a = δ_J u, b = δ_J v.
///
/// Where |a − b| < 1e−8 (1 + |a| + |b|) the quotient is replaced by g′((a + b)/2).
GridFunction furihata_dvd_type2(const ScalarFunction& g, int J, const GridFunction& v, const GridFunction& u,
                                const Realisation& realisation);

/// Polarised AVF DVD ∫₀¹ (δH/δw_1)[ξ w_{k+1} + (1−ξ) w_1, w_2, …, w_k] dξ on k + 1 arguments.
GridFunction pavf_dvd(const PolarisedDensity& pd, std::span<const GridFunction> ws, const Realisation& realisation);

/// For known w_1..w_k, the affine map w_{k+1} ↦ pavf_dvd(pd, [w_1, …, w_k, w_{k+1}]).
AffineOperator pavf_affine_split(const PolarisedDensity& pd, std::span<const GridFunction> ws,
                                 const Realisation& realisation);

}  // namespace polint
