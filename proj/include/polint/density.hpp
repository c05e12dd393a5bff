#pragma once

#include <compare>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "polint/grid.hpp"
#include "polint/polynomial.hpp"

namespace polint {

/// Library cap on the derivative order of an indeterminate.
inline constexpr int kMaxDerivOrder = 4;

/// The jet variable ∂^J u^α. Only d = 1 and scalar u (component 0) are exercised.
struct Indeterminate {
    int deriv_order = 0;
    int component = 0;

    auto operator<=>(const Indeterminate&) const = default;
};

std::string to_string(const Indeterminate& z);

struct Monomial {
    double coeff = 0.0;
    std::vector<std::pair<Indeterminate, int>> factors;  // canonical order, exponents ≥ 1

    int degree() const;
};

/// Polynomial density G(u, u_x, u_xx, ...).
class DensityPoly {
public:
    using Poly = Polynomial<Indeterminate>;

    DensityPoly() = default;
    explicit DensityPoly(Poly poly);

    /// Parses the text form, e.g. "0.5*u_x^2 - (1/3)*u^3".
    static DensityPoly parse(std::string_view text);

    static DensityPoly indeterminate(int deriv_order, double coeff = 1.0);

    const Poly& poly() const { return poly_; }
    std::vector<Monomial> terms() const;
    int degree() const { return poly_.degree(); }
    int max_deriv_order() const;
    bool is_zero() const { return poly_.is_zero(); }

    DensityPoly partial(const Indeterminate& z) const { return DensityPoly(poly_.partial(z)); }

    /// Total x-derivative D_x acting on the jet variables.
    DensityPoly total_derivative() const;

    std::string to_string() const;

    DensityPoly& operator+=(const DensityPoly& o) { poly_ += o.poly_; return *this; }
    DensityPoly& operator-=(const DensityPoly& o) { poly_ -= o.poly_; return *this; }
    friend DensityPoly operator+(DensityPoly a, const DensityPoly& b) { return a += b; }
    friend DensityPoly operator-(DensityPoly a, const DensityPoly& b) { return a -= b; }
    friend DensityPoly operator*(double s, DensityPoly a) { a.poly_ *= s; return a; }
    friend DensityPoly operator*(const DensityPoly& a, const DensityPoly& b) { return DensityPoly(a.poly_ * b.poly_); }

    bool operator==(const DensityPoly&) const = default;
    bool approx_equal(const DensityPoly& o, double tol) const { return poly_.approx_equal(o.poly_, tol); }

private:
    void validate() const;
    Poly poly_;
};

/// Which difference operator realises each jet variable on a grid.
///
/// Defaults: order 0 → identity, 1 → δ⟨1⟩, 2 → δ⟨2⟩, 3 → δ⟨3⟩, 4 → δ⟨2⟩∘δ⟨2⟩.
class Realisation {
public:
    explicit Realisation(const Grid1D& grid);

    const Grid1D& grid() const { return grid_; }
    const DiffOp& op_for(const Indeterminate& z) const;
    void set(const Indeterminate& z, DiffOp op);

private:
    Grid1D grid_;
    std::map<Indeterminate, DiffOp> ops_;
};

/// Σ_J (−1)^{|J|} D_J ∂G/∂u_J, kept as (outer order, inner polynomial) pairs.
///
/// On a grid each outer D_J with its sign becomes the transpose of the realising operator.
class VarDerivExpr {
public:
    struct Term {
        Indeterminate outer;
        DensityPoly inner;
    };

    explicit VarDerivExpr(std::vector<Term> terms) : terms_(std::move(terms)) {}

    const std::vector<Term>& terms() const { return terms_; }

    /// Continuous form with the outer derivatives carried out symbolically.
    DensityPoly expand() const;

    GridFunction evaluate(const GridFunction& u, const Realisation& realisation) const;

private:
    std::vector<Term> terms_;
};

DensityPoly partial(const DensityPoly& density, const Indeterminate& z);

VarDerivExpr euler_operator(const DensityPoly& density);

/// Pointwise G_d((δ_J u))_i.
GridFunction eval_density(const DensityPoly& density, const GridFunction& u, const Realisation& realisation);

/// H_d(u) = Σ_i b_i (G_d)_i Δx.
double hamiltonian_d(const DensityPoly& density, const GridFunction& u, const Realisation& realisation);

}  // namespace polint
