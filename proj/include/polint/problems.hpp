#pragma once

#include <string>

#include "polint/integrators.hpp"

namespace polint {

/// u_t + u_xxx + (u²)_x = 0 from ½u_x² − ⅓u³ with D = δ⟨1⟩.
///
/// u_x is realised by δ+, so the linear part becomes δ⟨1⟩δ⟨2⟩ = δ⟨3⟩.
HamiltonianSystem kdv_system(const Grid1D& grid);

/// u_t + u_xxx + (u^{p−1})_x = 0 from ½u_x² − (1/p)u^p.
HamiltonianSystem gkdv_system(const Grid1D& grid, int p);

/// u_t + u_xxx = 0 from ½u_x² with D = δ⟨1⟩.
HamiltonianSystem airy_system(const Grid1D& grid);

/// Parsed density with the default realisation and D = δ⟨1⟩.
HamiltonianSystem custom_system(const Grid1D& grid, const std::string& density);

/// Travelling wave of u_t + u_xxx + (u^{p−1})_x = 0 in ξ = x − ct:
/// (pc/2)^{1/(p−2)} sech^{2/(p−2)}((p−2)√c ξ/2), which is (3c/2) sech²((√c/2) ξ) for KdV.
double soliton_profile(double xi, double c, int p = 3);

/// Soliton centred at `centre` with its periodic images on the grid summed in.
GridFunction periodic_soliton(const Grid1D& grid, double c, double centre = 0.0, int p = 3);

}  // namespace polint
