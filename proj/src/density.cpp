#include "polint/density.hpp"

#include <cctype>
#include <cstdlib>
#include <sstream>

#include "polint/evaluation.hpp"

namespace polint {

std::string to_string(const Indeterminate& z) {
    std::string s = "u";
    if (z.component != 0) s += std::to_string(z.component);
    if (z.deriv_order > 0) s += "_" + std::string(static_cast<std::size_t>(z.deriv_order), 'x');
    return s;
}

int Monomial::degree() const {
    int d = 0;
    for (const auto& f : factors) d += f.second;
    return d;
}

DensityPoly::DensityPoly(Poly poly) : poly_(std::move(poly)) { validate(); }

void DensityPoly::validate() const {
    for (const auto& [key, c] : poly_.terms()) {
        for (const auto& [z, e] : key) {
            if (z.deriv_order < 0) throw InvalidArgument("negative derivative order");
            if (z.component != 0) throw InvalidArgument("only scalar densities (component 0) are supported");
        }
    }
}

DensityPoly DensityPoly::indeterminate(int deriv_order, double coeff) {
    return DensityPoly(Poly::variable(Indeterminate{deriv_order, 0}, coeff));
}

std::vector<Monomial> DensityPoly::terms() const {
    std::vector<Monomial> out;
    out.reserve(poly_.size());
    for (const auto& [key, c] : poly_.terms()) out.push_back(Monomial{c, key});
    return out;
}

int DensityPoly::max_deriv_order() const {
    int m = 0;
    for (const auto& [key, c] : poly_.terms())
        for (const auto& [z, e] : key) m = std::max(m, z.deriv_order);
    return m;
}

DensityPoly DensityPoly::total_derivative() const {
    Poly out;
    for (const auto& [key, c] : poly_.terms()) {
        for (std::size_t i = 0; i < key.size(); ++i) {
            auto k = key;
            const auto [z, e] = key[i];
            if (e == 1)
                k.erase(k.begin() + static_cast<std::ptrdiff_t>(i));
            else
                k[i].second = e - 1;
            k.emplace_back(Indeterminate{z.deriv_order + 1, z.component}, 1);
            out.add_term(c * e, std::move(k));
        }
    }
    return DensityPoly(std::move(out));
}

std::string DensityPoly::to_string() const {
    if (poly_.is_zero()) return "0";
    std::ostringstream os;
    os.precision(15);
    bool first = true;
    for (const auto& [key, c] : poly_.terms()) {
        double mag = c;
        if (first) {
            if (c < 0) os << "-";
        } else {
            os << (c < 0 ? " - " : " + ");
        }
        mag = std::abs(c);
        first = false;
        const bool unit = mag == 1.0 && !key.empty();
        if (!unit) os << mag;
        bool first_factor = true;
        for (const auto& [z, e] : key) {
            if (!unit || !first_factor) os << "*";
            os << polint::to_string(z);
            if (e != 1) os << "^" << e;
            first_factor = false;
        }
    }
    return os.str();
}

namespace {

class DensityParser {
public:
    explicit DensityParser(std::string_view text) : s_(text) {}

    DensityPoly::Poly parse() {
        auto p = expr();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
        return p;
    }

private:
    using Poly = DensityPoly::Poly;

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError("density: " + msg, pos_); }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Poly expr() {
        Poly acc = term();
        for (;;) {
            if (accept('+'))
                acc += term();
            else if (accept('-'))
                acc -= term();
            else
                return acc;
        }
    }

    Poly term() {
        Poly acc = unary();
        for (;;) {
            if (accept('*')) {
                acc = acc * unary();
            } else if (accept('/')) {
                const auto at = pos_;
                Poly d = unary();
                const auto& t = d.terms();
                if (t.size() != 1 || !t.begin()->first.empty()) {
                    pos_ = at;
                    fail("division is only allowed by a nonzero constant");
                }
                acc *= 1.0 / t.begin()->second;
            } else {
                return acc;
            }
        }
    }

    Poly unary() {
        if (accept('-')) return -unary();
        if (accept('+')) return unary();
        return power();
    }

    Poly power() {
        Poly base = primary();
        if (accept('^')) {
            skip_ws();
            const auto start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (start == pos_) fail("expected a non-negative integer exponent");
            const int e = std::stoi(std::string(s_.substr(start, pos_ - start)));
            return base.pow(e);
        }
        return base;
    }

    Poly primary() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            Poly inner = expr();
            if (!accept(')')) fail("expected ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (c == 'u') return identifier();
        fail("unexpected character '" + std::string(1, c) + "'");
    }

    Poly number() {
        const std::string rest(s_.substr(pos_));
        char* end = nullptr;
        const double v = std::strtod(rest.c_str(), &end);
        if (end == rest.c_str()) fail("malformed number");
        pos_ += static_cast<std::size_t>(end - rest.c_str());
        return Poly::constant(v);
    }

    Poly identifier() {
        ++pos_;  // 'u'
        int order = 0;
        if (pos_ < s_.size() && s_[pos_] == '_') {
            ++pos_;
            while (pos_ < s_.size() && s_[pos_] == 'x') {
                ++order;
                ++pos_;
            }
            if (order == 0) fail("expected derivative letters after 'u_'");
        }
        if (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            fail("unknown identifier");
        if (order > kMaxDerivOrder) fail("derivative order exceeds " + std::to_string(kMaxDerivOrder));
        return Poly::variable(Indeterminate{order, 0});
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace

DensityPoly DensityPoly::parse(std::string_view text) {
    DensityParser parser(text);
    return DensityPoly(parser.parse());
}

Realisation::Realisation(const Grid1D& grid) : grid_(grid) {
    const auto ops = make_standard_ops(grid);
    ops_.emplace(Indeterminate{0, 0}, ops.at("identity"));
    ops_.emplace(Indeterminate{1, 0}, ops.at("d1"));
    ops_.emplace(Indeterminate{2, 0}, ops.at("d2"));
    ops_.emplace(Indeterminate{3, 0}, ops.at("d3"));
    ops_.emplace(Indeterminate{4, 0}, DiffOp(grid, ops.at("d2").compose(ops.at("d2")).stencil(), 4, "d4"));
}

const DiffOp& Realisation::op_for(const Indeterminate& z) const {
    auto it = ops_.find(z);
    if (it == ops_.end()) throw InvalidArgument("no difference operator realises " + to_string(z));
    return it->second;
}

void Realisation::set(const Indeterminate& z, DiffOp op) {
    require_same_grid(grid_, op.grid(), "Realisation::set");
    ops_.insert_or_assign(z, std::move(op));
}

DensityPoly VarDerivExpr::expand() const {
    DensityPoly out;
    for (const auto& t : terms_) {
        DensityPoly d = t.inner;
        for (int r = 0; r < t.outer.deriv_order; ++r) d = d.total_derivative();
        out += (t.outer.deriv_order % 2 == 0 ? 1.0 : -1.0) * d;
    }
    return out;
}

GridFunction VarDerivExpr::evaluate(const GridFunction& u, const Realisation& realisation) const {
    require_same_grid(u.grid(), realisation.grid(), "VarDerivExpr::evaluate");
    SlotFields fields(realisation, {u.values()});
    Eigen::VectorXd out = Eigen::VectorXd::Zero(u.values().size());
    for (const auto& t : terms_) {
        const Eigen::VectorXd inner = eval_pointwise(lift(t.inner), fields);
        out += realisation.op_for(t.outer).transpose().apply(inner);
    }
    return GridFunction(u.grid(), std::move(out));
}

DensityPoly partial(const DensityPoly& density, const Indeterminate& z) { return density.partial(z); }

VarDerivExpr euler_operator(const DensityPoly& density) {
    if (density.degree() < 1) throw InvalidArgument("euler_operator: density must have degree >= 1");
    std::vector<Indeterminate> vars;
    for (const auto& [key, c] : density.poly().terms())
        for (const auto& [z, e] : key)
            if (std::find(vars.begin(), vars.end(), z) == vars.end()) vars.push_back(z);
    std::sort(vars.begin(), vars.end());
    std::vector<VarDerivExpr::Term> terms;
    for (const auto& z : vars) terms.push_back({z, density.partial(z)});
    return VarDerivExpr(std::move(terms));
}

GridFunction eval_density(const DensityPoly& density, const GridFunction& u, const Realisation& realisation) {
    require_same_grid(u.grid(), realisation.grid(), "eval_density");
    SlotFields fields(realisation, {u.values()});
    return GridFunction(u.grid(), eval_pointwise(lift(density), fields));
}

double hamiltonian_d(const DensityPoly& density, const GridFunction& u, const Realisation& realisation) {
    return integral(eval_density(density, u, realisation));
}

}  // namespace polint
