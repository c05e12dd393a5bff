#include "polint/variational.hpp"

#include <cmath>

namespace polint {

AffineOperator::AffineOperator(const Grid1D& grid, Eigen::MatrixXd matrix, Eigen::VectorXd offset)
    : grid_(grid), matrix_(std::move(matrix)), offset_(std::move(offset)) {
    const auto n = static_cast<Eigen::Index>(grid.n_points());
    if (matrix_.rows() != n || matrix_.cols() != n || offset_.size() != n)
        throw GridMismatch("AffineOperator: shape does not match grid");
}

GridFunction AffineOperator::apply(const GridFunction& x) const {
    require_same_grid(grid_, x.grid(), "AffineOperator::apply");
    return GridFunction(grid_, matrix_ * x.values() + offset_);
}

GridFunction avf_dvd(const DensityPoly& density, const GridFunction& v, const GridFunction& u,
                     const Realisation& realisation) {
    require_same_grid(v.grid(), u.grid(), "avf_dvd");
    require_same_grid(u.grid(), realisation.grid(), "avf_dvd");
    return GridFunction(u.grid(), averaged_slot_gradient(lift(density), 0, v.values(), u.values(), {v.values()}, realisation));
}

Eigen::MatrixXd avf_dvd_jacobian(const DensityPoly& density, const GridFunction& v, const GridFunction& u,
                                 const Realisation& realisation) {
    require_same_grid(v.grid(), u.grid(), "avf_dvd_jacobian");
    require_same_grid(u.grid(), realisation.grid(), "avf_dvd_jacobian");
    return averaged_slot_jacobian(lift(density), 0, v.values(), u.values(), {v.values()}, realisation);
}

GridFunction furihata_dvd_type1(int J, int K, const GridFunction& v, const GridFunction& u,
                                const Realisation& realisation) {
    require_same_grid(v.grid(), u.grid(), "furihata_dvd_type1");
    if (J < 0 || K < 0 || J > kMaxDerivOrder || K > kMaxDerivOrder)
        throw InvalidArgument("furihata_dvd_type1: derivative order out of range");
    const auto& dj = realisation.op_for(Indeterminate{J, 0});
    const auto& dk = realisation.op_for(Indeterminate{K, 0});
    const Eigen::VectorXd mid = 0.5 * (u.values() + v.values());
    Eigen::VectorXd out = dj.transpose().apply(dk.apply(mid)) + dk.transpose().apply(dj.apply(mid));
    return GridFunction(u.grid(), std::move(out));
}

GridFunction furihata_dvd_type2(const ScalarFunction& g, int J, const GridFunction& v, const GridFunction& u,
                                const Realisation& realisation) {
    require_same_grid(v.grid(), u.grid(), "furihata_dvd_type2");
    const auto& dj = realisation.op_for(Indeterminate{J, 0});
    const Eigen::VectorXd a = dj.apply(u.values());
    const Eigen::VectorXd b = dj.apply(v.values());
    Eigen::VectorXd q(a.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        if (std::abs(diff) < 1e-8 * (1.0 + std::abs(a[i]) + std::abs(b[i])))
            q[i] = g.derivative(0.5 * (a[i] + b[i]));
        else
            q[i] = (g.value(a[i]) - g.value(b[i])) / diff;
    }
    return GridFunction(u.grid(), dj.transpose().apply(q));
}

namespace {

std::vector<Eigen::VectorXd> fixed_slots(const PolarisedDensity& pd, std::span<const GridFunction> ws,
                                         const Realisation& realisation) {
    std::vector<Eigen::VectorXd> slots;
    slots.reserve(static_cast<std::size_t>(pd.k()));
    for (int s = 0; s < pd.k(); ++s) {
        const auto& w = ws[static_cast<std::size_t>(s)];
        require_same_grid(w.grid(), realisation.grid(), "pavf");
        slots.push_back(w.values());
    }
    return slots;
}

}  // namespace

GridFunction pavf_dvd(const PolarisedDensity& pd, std::span<const GridFunction> ws, const Realisation& realisation) {
    const auto k = static_cast<std::size_t>(pd.k());
    if (ws.size() != k + 1) throw InvalidArgument("pavf_dvd: expected k + 1 = " + std::to_string(k + 1) + " arguments");
    require_same_grid(ws[k].grid(), realisation.grid(), "pavf_dvd");
    auto slots = fixed_slots(pd, ws, realisation);
    return GridFunction(realisation.grid(),
                        averaged_slot_gradient(pd.poly(), 0, ws[0].values(), ws[k].values(), std::move(slots), realisation));
}

AffineOperator pavf_affine_split(const PolarisedDensity& pd, std::span<const GridFunction> ws,
                                 const Realisation& realisation) {
    const auto k = static_cast<std::size_t>(pd.k());
    if (ws.size() != k) throw InvalidArgument("pavf_affine_split: expected k = " + std::to_string(k) + " known arguments");
    if (pd.max_slot_degree() > 2) throw InvalidArgument("pavf_affine_split: polarisation is not quadratic in every slot");
    auto slots = fixed_slots(pd, ws, realisation);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(ws[0].values().size());
    // Quadratic in slot 0, so the second slot derivatives do not depend on the endpoint.
    Eigen::MatrixXd matrix = averaged_slot_jacobian(pd.poly(), 0, ws[0].values(), zero, slots, realisation);
    Eigen::VectorXd offset = averaged_slot_gradient(pd.poly(), 0, ws[0].values(), zero, std::move(slots), realisation);
    return AffineOperator(realisation.grid(), std::move(matrix), std::move(offset));
}

}  // namespace polint
