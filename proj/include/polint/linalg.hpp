#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "polint/grid.hpp"

namespace polint {

struct LinearSystem {
    Eigen::MatrixXd matrix;
    GridFunction rhs;
};

/// Dense LU with partial pivoting, followed by the residual check ‖Ax − b‖∞ ≤ 1e−10 ‖b‖∞.
/// Throws SingularSystem on a zero pivot or a failed residual check; bumps *solve_count on success.
GridFunction solve_linear(const LinearSystem& sys, std::size_t* solve_count = nullptr);

}  // namespace polint
