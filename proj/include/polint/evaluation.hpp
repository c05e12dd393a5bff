#pragma once

#include <compare>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "polint/density.hpp"

namespace polint {

/// A jet variable of one argument slot of a multi-argument density.
struct SlotVar {
    int slot = 0;
    Indeterminate var;

    auto operator<=>(const SlotVar&) const = default;
};

using SlotPoly = Polynomial<SlotVar>;

/// Embeds a one-argument density into slot `slot`.
SlotPoly lift(const DensityPoly& density, int slot = 0);

/// Gauss–Legendre rule on [0, 1].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point rule; exact for polynomials of degree 2n − 1.
const QuadratureRule& gauss_legendre_01(int n);

/// Fewest nodes integrating degree `degree` exactly.
int gauss_nodes_for_degree(int degree);

/// Lazily computed δ_J w for every slot argument.
class SlotFields {
public:
    SlotFields(const Realisation& realisation, std::vector<Eigen::VectorXd> slot_values);

    const Eigen::VectorXd& get(const SlotVar& v) const;
    std::size_t slot_count() const { return slots_.size(); }
    const Realisation& realisation() const { return *realisation_; }

private:
    const Realisation* realisation_;
    std::vector<Eigen::VectorXd> slots_;
    mutable std::map<SlotVar, Eigen::VectorXd> cache_;
};

/// Pointwise evaluation of a slot polynomial.
Eigen::VectorXd eval_pointwise(const SlotPoly& poly, const SlotFields& fields);

/// Σ_J δ_J^T ∂poly/∂(slot, J), the discrete variational derivative in one slot.
Eigen::VectorXd slot_gradient(const SlotPoly& poly, int slot, const SlotFields& fields);

/// ∫₀¹ (slot gradient)[slot ← ξ·to + (1−ξ)·from] dξ with the remaining slots fixed.
///
/// `others` supplies values for every slot; the entry at `slot` is ignored.
Eigen::VectorXd averaged_slot_gradient(const SlotPoly& poly, int slot, const Eigen::VectorXd& from,
                                       const Eigen::VectorXd& to, std::vector<Eigen::VectorXd> others,
                                       const Realisation& realisation);

/// Dense Σ_{J,K} δ_J^T diag(∫₀¹ m(ξ) ∂²poly/∂(s,J)∂(s,K) dξ) δ_K along the same segment,
/// where m(ξ) = ξ. This is the derivative of averaged_slot_gradient with respect to `to`.
Eigen::MatrixXd averaged_slot_jacobian(const SlotPoly& poly, int slot, const Eigen::VectorXd& from,
                                       const Eigen::VectorXd& to, std::vector<Eigen::VectorXd> others,
                                       const Realisation& realisation);

/// Dense Σ_{J,K} δ_J^T diag(∂²poly/∂(s,J)∂(s,K)) δ_K at fixed slot values.
Eigen::MatrixXd slot_hessian(const SlotPoly& poly, int slot, const SlotFields& fields);

/// Jet variables of `slot` that occur in poly.
std::vector<Indeterminate> slot_indeterminates(const SlotPoly& poly, int slot);

/// Accumulates weight · δ_J^T diag(c) δ_K into m using the stencils directly.
void add_sandwich(Eigen::MatrixXd& m, const DiffOp& left, const Eigen::VectorXd& c, const DiffOp& right);

}  // namespace polint
