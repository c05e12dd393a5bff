#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polint/error.hpp"

namespace polint {

/// Uniform periodic 1-D grid. Point i sits at left + i*dx; index arithmetic wraps mod n_points.
class Grid1D {
public:
    Grid1D(std::size_t n_points, double dx, double left = 0.0);

    /// Grid covering [left, left + length) with n_points cells.
    static Grid1D over(double left, double length, std::size_t n_points);

    std::size_t n_points() const { return n_; }
    double dx() const { return dx_; }
    double left() const { return left_; }
    double length() const { return static_cast<double>(n_) * dx_; }
    double x(std::size_t i) const { return left_ + static_cast<double>(i) * dx_; }

    std::size_t wrap(long long i) const {
        const auto n = static_cast<long long>(n_);
        return static_cast<std::size_t>(((i % n) + n) % n);
    }

    bool operator==(const Grid1D& other) const = default;

private:
    std::size_t n_;
    double dx_;
    double left_;
};

/// Real values on a Grid1D.
class GridFunction {
public:
    explicit GridFunction(const Grid1D& grid);
    GridFunction(const Grid1D& grid, Eigen::VectorXd values);
    GridFunction(const Grid1D& grid, std::span<const double> values);

    template <class F>
    static GridFunction sample(const Grid1D& grid, F&& f) {
        GridFunction g(grid);
        for (std::size_t i = 0; i < grid.n_points(); ++i) g.values_[static_cast<Eigen::Index>(i)] = f(grid.x(i));
        return g;
    }

    static GridFunction constant(const Grid1D& grid, double value);

    const Grid1D& grid() const { return grid_; }
    const Eigen::VectorXd& values() const { return values_; }
    Eigen::VectorXd& values() { return values_; }
    std::size_t size() const { return grid_.n_points(); }

    double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
    double& operator[](std::size_t i) { return values_[static_cast<Eigen::Index>(i)]; }

    double sup_norm() const { return values_.size() ? values_.cwiseAbs().maxCoeff() : 0.0; }

    GridFunction& operator+=(const GridFunction& o);
    GridFunction& operator-=(const GridFunction& o);
    GridFunction& operator*=(double s);
    friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
    friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
    friend GridFunction operator*(double s, GridFunction a) { return a *= s; }
    friend GridFunction operator*(GridFunction a, double s) { return a *= s; }

private:
    Grid1D grid_;
    Eigen::VectorXd values_;
};

void require_same_grid(const Grid1D& a, const Grid1D& b, const char* where);

/// Circulant finite-difference operator: (Op f)_i = sum_s c_s f_{i+s mod N}.
class DiffOp {
public:
    using Stencil = std::map<int, double>;

    DiffOp(const Grid1D& grid, Stencil stencil, int order, std::string name = {});

    static DiffOp identity(const Grid1D& grid);
    static DiffOp forward(const Grid1D& grid);   // δ+
    static DiffOp backward(const Grid1D& grid);  // δ−
    static DiffOp centered(const Grid1D& grid);  // δ⟨1⟩

    const Grid1D& grid() const { return grid_; }
    const Stencil& stencil() const { return stencil_; }
    int order() const { return order_; }
    const std::string& name() const { return name_; }

    GridFunction apply(const GridFunction& f) const;
    Eigen::VectorXd apply(const Eigen::VectorXd& f) const;

    DiffOp transpose() const;
    /// (*this) ∘ other, i.e. other is applied first.
    DiffOp compose(const DiffOp& other) const;
    DiffOp scaled(double s) const;
    DiffOp negated() const { return scaled(-1.0); }

    bool is_skew() const;
    bool is_symmetric() const;

    /// Eigenvalue on the mode e^{i k x}: sum_s c_s e^{i k s dx}.
    std::complex<double> symbol(double wavenumber) const;

    Eigen::MatrixXd dense() const;

    /// Stencil equality up to tol on every coefficient.
    bool approx_equal(const DiffOp& other, double tol = 0.0) const;

private:
    Grid1D grid_;
    Stencil stencil_;
    int order_;
    std::string name_;
};

/// The standard operator set: "identity", "forward", "backward", "d1", "d2", "d3".
std::map<std::string, DiffOp> make_standard_ops(const Grid1D& grid);

/// All-ones quadrature weights b_i.
struct QuadratureWeights {
    std::vector<double> weights;
    explicit QuadratureWeights(const Grid1D& grid) : weights(grid.n_points(), 1.0) {}
};

/// Unscaled pairing sum_i f_i g_i.
double inner(const GridFunction& f, const GridFunction& g);

/// sum_i b_i f_i dx with b_i = 1.
double integral(const GridFunction& f);

}  // namespace polint
