#include "polint/linalg.hpp"

#include <cmath>
#include <sstream>

namespace polint {

GridFunction solve_linear(const LinearSystem& sys, std::size_t* solve_count) {
    const auto n = sys.rhs.values().size();
    if (sys.matrix.rows() != n || sys.matrix.cols() != n) throw InvalidArgument("solve_linear: matrix is not square of rhs size");

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.matrix);
    const auto& packed = lu.matrixLU();
    const double scale = sys.matrix.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(std::abs(packed(i, i)) > 1e-300) || std::abs(packed(i, i)) <= 1e-15 * scale) {
            std::ostringstream os;
            os << "solve_linear: singular matrix (pivot " << i << " = " << packed(i, i) << ")";
            throw SingularSystem(os.str());
        }
    }
    Eigen::VectorXd x = lu.solve(sys.rhs.values());
    const double bnorm = sys.rhs.values().cwiseAbs().maxCoeff();
    const double res = (sys.matrix * x - sys.rhs.values()).cwiseAbs().maxCoeff();
    if (!std::isfinite(res) || res > 1e-10 * bnorm) {
        std::ostringstream os;
        os << "solve_linear: residual check failed (" << res << " vs ‖b‖∞ = " << bnorm << ")";
        throw SingularSystem(os.str());
    }
    if (solve_count) ++*solve_count;
    return GridFunction(sys.rhs.grid(), std::move(x));
}

}  // namespace polint
