#include "polint/grid.hpp"

#include <cmath>

namespace polint {

Grid1D::Grid1D(std::size_t n_points, double dx, double left) : n_(n_points), dx_(dx), left_(left) {
    if (n_points < 3) throw InvalidArgument("Grid1D needs at least 3 points");
    if (!(dx > 0.0) || !std::isfinite(dx)) throw InvalidArgument("Grid1D spacing must be positive");
}

Grid1D Grid1D::over(double left, double length, std::size_t n_points) {
    if (n_points == 0) throw InvalidArgument("Grid1D needs at least 3 points");
    return Grid1D(n_points, length / static_cast<double>(n_points), left);
}

GridFunction::GridFunction(const Grid1D& grid)
    : grid_(grid), values_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.n_points()))) {}

GridFunction::GridFunction(const Grid1D& grid, Eigen::VectorXd values) : grid_(grid), values_(std::move(values)) {
    if (static_cast<std::size_t>(values_.size()) != grid.n_points())
        throw GridMismatch("GridFunction: value count does not match grid");
}

GridFunction::GridFunction(const Grid1D& grid, std::span<const double> values)
    : GridFunction(grid, Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()))) {}

GridFunction GridFunction::constant(const Grid1D& grid, double value) {
    return GridFunction(grid, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(grid.n_points()), value));
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
    require_same_grid(grid_, o.grid_, "GridFunction +=");
    values_ += o.values_;
    return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
    require_same_grid(grid_, o.grid_, "GridFunction -=");
    values_ -= o.values_;
    return *this;
}

GridFunction& GridFunction::operator*=(double s) {
    values_ *= s;
    return *this;
}

void require_same_grid(const Grid1D& a, const Grid1D& b, const char* where) {
    if (!(a == b)) throw GridMismatch(std::string(where) + ": grid mismatch");
}

DiffOp::DiffOp(const Grid1D& grid, Stencil stencil, int order, std::string name)
    : grid_(grid), stencil_(std::move(stencil)), order_(order), name_(std::move(name)) {
    std::erase_if(stencil_, [](const auto& kv) { return kv.second == 0.0; });
}

DiffOp DiffOp::identity(const Grid1D& grid) { return DiffOp(grid, {{0, 1.0}}, 0, "identity"); }

DiffOp DiffOp::forward(const Grid1D& grid) {
    const double h = grid.dx();
    return DiffOp(grid, {{0, -1.0 / h}, {1, 1.0 / h}}, 1, "forward");
}

DiffOp DiffOp::backward(const Grid1D& grid) {
    const double h = grid.dx();
    return DiffOp(grid, {{-1, -1.0 / h}, {0, 1.0 / h}}, 1, "backward");
}

DiffOp DiffOp::centered(const Grid1D& grid) {
    const double h = grid.dx();
    return DiffOp(grid, {{-1, -0.5 / h}, {1, 0.5 / h}}, 1, "d1");
}

Eigen::VectorXd DiffOp::apply(const Eigen::VectorXd& f) const {
    const auto n = static_cast<long long>(grid_.n_points());
    if (f.size() != n) throw GridMismatch("DiffOp::apply: size mismatch");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (const auto& [s, c] : stencil_) {
        for (long long i = 0; i < n; ++i) out[i] += c * f[static_cast<Eigen::Index>(grid_.wrap(i + s))];
    }
    return out;
}

GridFunction DiffOp::apply(const GridFunction& f) const {
    require_same_grid(grid_, f.grid(), "DiffOp::apply");
    return GridFunction(grid_, apply(f.values()));
}

DiffOp DiffOp::transpose() const {
    Stencil t;
    for (const auto& [s, c] : stencil_) t[-s] = c;
    return DiffOp(grid_, std::move(t), order_, name_.empty() ? name_ : name_ + "^T");
}

DiffOp DiffOp::compose(const DiffOp& other) const {
    require_same_grid(grid_, other.grid_, "DiffOp::compose");
    // (A B f)_i = sum_s a_s (B f)_{i+s} = sum_{s,t} a_s b_t f_{i+s+t}
    Stencil out;
    for (const auto& [s, a] : stencil_)
        for (const auto& [t, b] : other.stencil_) out[s + t] += a * b;
    return DiffOp(grid_, std::move(out), order_ + other.order_);
}

DiffOp DiffOp::scaled(double s) const {
    Stencil out;
    for (const auto& [o, c] : stencil_) out[o] = s * c;
    return DiffOp(grid_, std::move(out), order_);
}

bool DiffOp::is_skew() const {
    for (const auto& [s, c] : stencil_) {
        auto it = stencil_.find(-s);
        if (it == stencil_.end() || it->second != -c) return false;
    }
    return true;
}

bool DiffOp::is_symmetric() const {
    for (const auto& [s, c] : stencil_) {
        auto it = stencil_.find(-s);
        if (it == stencil_.end() || it->second != c) return false;
    }
    return true;
}

std::complex<double> DiffOp::symbol(double wavenumber) const {
    std::complex<double> z{0.0, 0.0};
    for (const auto& [s, c] : stencil_) z += c * std::polar(1.0, wavenumber * s * grid_.dx());
    return z;
}

Eigen::MatrixXd DiffOp::dense() const {
    const auto n = static_cast<long long>(grid_.n_points());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (long long i = 0; i < n; ++i)
        for (const auto& [s, c] : stencil_) m(i, static_cast<Eigen::Index>(grid_.wrap(i + s))) += c;
    return m;
}

bool DiffOp::approx_equal(const DiffOp& other, double tol) const {
    if (!(grid_ == other.grid_)) return false;
    Stencil keys = stencil_;
    for (const auto& kv : other.stencil_) keys.emplace(kv.first, 0.0);
    for (const auto& [s, unused] : keys) {
        (void)unused;
        auto a = stencil_.find(s);
        auto b = other.stencil_.find(s);
        const double ca = a == stencil_.end() ? 0.0 : a->second;
        const double cb = b == other.stencil_.end() ? 0.0 : b->second;
        if (std::abs(ca - cb) > tol) return false;
    }
    return true;
}

std::map<std::string, DiffOp> make_standard_ops(const Grid1D& grid) {
    auto fwd = DiffOp::forward(grid);
    auto bwd = DiffOp::backward(grid);
    auto d1 = DiffOp::centered(grid);
    auto d2 = fwd.compose(bwd);
    auto d3 = d1.compose(d2);
    std::map<std::string, DiffOp> ops;
    ops.emplace("identity", DiffOp::identity(grid));
    ops.emplace("forward", fwd);
    ops.emplace("backward", bwd);
    ops.emplace("d1", d1);
    ops.emplace("d2", DiffOp(grid, d2.stencil(), 2, "d2"));
    ops.emplace("d3", DiffOp(grid, d3.stencil(), 3, "d3"));
    return ops;
}

double inner(const GridFunction& f, const GridFunction& g) {
    require_same_grid(f.grid(), g.grid(), "inner");
    return f.values().dot(g.values());
}

double integral(const GridFunction& f) { return f.values().sum() * f.grid().dx(); }

}  // namespace polint
