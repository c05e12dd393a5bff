#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "polint/density.hpp"
#include "polint/evaluation.hpp"

namespace polint {

struct PolarisedMonomial {
    double coeff = 0.0;
    /// per_slot_factors[s] lists (indeterminate, exponent) of argument slot s.
    std::vector<std::vector<std::pair<Indeterminate, int>>> per_slot_factors;
};

/// A k-argument density G[w_1, …, w_k], cyclically invariant and consistent with its source.
class PolarisedDensity {
public:
    PolarisedDensity(int k, double theta, SlotPoly poly);

    int k() const { return k_; }
    double theta() const { return theta_; }
    const SlotPoly& poly() const { return poly_; }

    std::vector<PolarisedMonomial> terms() const;

    /// Highest total exponent of any single slot.
    int max_slot_degree() const;

    /// Arguments relabelled (w_1, …, w_k) → (w_2, …, w_k, w_1).
    PolarisedDensity shifted() const;

    bool is_cyclic(double tol = 0.0) const;

    /// Slot-tagged monomial list as JSON text.
    std::string to_json() const;

private:
    int k_;
    double theta_;
    SlotPoly poly_;
};

/// Reorders the expanded factor list of a monomial before pair-grouping.
using FactorOrder = std::function<std::vector<Indeterminate>(std::vector<Indeterminate>)>;

/// Quadratic polarisation by pair-grouping and cyclic averaging.
///
/// Each monomial's factors (canonical order unless `order` is given) are grouped as
/// z_r = f_{2r−1} f_{2r}, with an odd leftover factor alone, z_r placed in slot r and the
/// product averaged over the k cyclic shifts. A degree-2 monomial f g is instead blended as
/// θ·avg(f g in one slot) + (1−θ)·avg(f in one slot, g in the next).
PolarisedDensity polarise(const DensityPoly& density, int k, double theta = 0.5, const FactorOrder& order = {});

/// Substitutes one argument into every slot.
DensityPoly collapse(const PolarisedDensity& pd);

/// ∫ G[w_1, …, w_k] dx on the grid: Σ_i b_i G_d(...)_i Δx.
double eval_polarised(const PolarisedDensity& pd, std::span<const GridFunction> ws, const Realisation& realisation);

/// The gKdV polarisation with k = ⌈p/2⌉ arguments, built term by term from its closed form.
///
/// Derivative part: ½ u_x² with the θ-blend when k = 2, (1/2k) Σ (w_i)_x² otherwise.
/// Nonlinear part: −(1/(pk)) Σ_i w_i Π_{j≠i} w_j² for odd p, −(1/p) Π_j w_j² for even p.
PolarisedDensity polarise_gkdv(int p, double theta = 0.5);

/// ½ u_x² − (1/p) u^p.
DensityPoly gkdv_density(int p);

}  // namespace polint
