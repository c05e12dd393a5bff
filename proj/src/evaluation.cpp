#include "polint/evaluation.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace polint {

SlotPoly lift(const DensityPoly& density, int slot) {
    return density.poly().map_vars<SlotVar>([slot](const Indeterminate& z) { return SlotVar{slot, z}; });
}

namespace {

constexpr int kMaxGaussNodes = 16;

// P_n(x) and P_{n-1}(x) by the three-term recurrence.
std::pair<double, double> legendre_pair(int n, double x) {
    double prev = 1.0, cur = x;
    for (int k = 2; k <= n; ++k) {
        const double next = ((2.0 * k - 1.0) * x * cur - (k - 1.0) * prev) / k;
        prev = cur;
        cur = next;
    }
    return {cur, prev};
}

QuadratureRule compute_gauss_legendre_01(int n) {
    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            const auto [pn, pm] = legendre_pair(n, x);
            const double dp = n * (x * pn - pm) / (x * x - 1.0);
            const double step = pn / dp;
            x -= step;
            if (std::abs(step) < 1e-16) break;
        }
        const auto [pn, pm] = legendre_pair(n, x);
        const double dp = n * (x * pn - pm) / (x * x - 1.0);
        // [-1, 1] → [0, 1], ascending
        const auto slot = static_cast<std::size_t>(n - 1 - i);
        rule.nodes[slot] = 0.5 * (x + 1.0);
        rule.weights[slot] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre_01(int n) {
    static const std::array<QuadratureRule, kMaxGaussNodes + 1> rules = [] {
        std::array<QuadratureRule, kMaxGaussNodes + 1> r;
        for (int i = 1; i <= kMaxGaussNodes; ++i) r[static_cast<std::size_t>(i)] = compute_gauss_legendre_01(i);
        return r;
    }();
    if (n < 1 || n > kMaxGaussNodes) throw InvalidArgument("gauss_legendre_01: unsupported node count");
    return rules[static_cast<std::size_t>(n)];
}

int gauss_nodes_for_degree(int degree) { return std::max(1, (degree + 2) / 2); }

SlotFields::SlotFields(const Realisation& realisation, std::vector<Eigen::VectorXd> slot_values)
    : realisation_(&realisation), slots_(std::move(slot_values)) {
    const auto n = static_cast<Eigen::Index>(realisation.grid().n_points());
    for (const auto& s : slots_)
        if (s.size() != n) throw GridMismatch("SlotFields: slot value length does not match grid");
}

const Eigen::VectorXd& SlotFields::get(const SlotVar& v) const {
    if (v.slot < 0 || static_cast<std::size_t>(v.slot) >= slots_.size())
        throw InvalidArgument("SlotFields: slot index out of range");
    auto it = cache_.find(v);
    if (it != cache_.end()) return it->second;
    const auto& base = slots_[static_cast<std::size_t>(v.slot)];
    Eigen::VectorXd field = v.var.deriv_order == 0 ? base : realisation_->op_for(v.var).apply(base);
    return cache_.emplace(v, std::move(field)).first->second;
}

Eigen::VectorXd eval_pointwise(const SlotPoly& poly, const SlotFields& fields) {
    const auto n = static_cast<Eigen::Index>(fields.realisation().grid().n_points());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd term(n);
    for (const auto& [key, c] : poly.terms()) {
        term.setConstant(c);
        for (const auto& [v, e] : key) {
            const auto& f = fields.get(v);
            for (int i = 0; i < e; ++i) term.array() *= f.array();
        }
        out += term;
    }
    return out;
}

std::vector<Indeterminate> slot_indeterminates(const SlotPoly& poly, int slot) {
    std::vector<Indeterminate> vars;
    for (const auto& [key, c] : poly.terms())
        for (const auto& [v, e] : key)
            if (v.slot == slot && std::find(vars.begin(), vars.end(), v.var) == vars.end()) vars.push_back(v.var);
    std::sort(vars.begin(), vars.end());
    return vars;
}

Eigen::VectorXd slot_gradient(const SlotPoly& poly, int slot, const SlotFields& fields) {
    const auto& real = fields.realisation();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(real.grid().n_points()));
    for (const auto& z : slot_indeterminates(poly, slot)) {
        const Eigen::VectorXd inner = eval_pointwise(poly.partial(SlotVar{slot, z}), fields);
        out += real.op_for(z).transpose().apply(inner);
    }
    return out;
}

namespace {

int slot_degree(const SlotPoly& poly, int slot) {
    return poly.degree_in([slot](const SlotVar& v) { return v.slot == slot; });
}

}  // namespace

Eigen::VectorXd averaged_slot_gradient(const SlotPoly& poly, int slot, const Eigen::VectorXd& from,
                                       const Eigen::VectorXd& to, std::vector<Eigen::VectorXd> others,
                                       const Realisation& realisation) {
    if (slot < 0 || static_cast<std::size_t>(slot) >= others.size())
        throw InvalidArgument("averaged_slot_gradient: slot index out of range");
    const auto vars = slot_indeterminates(poly, slot);
    std::vector<SlotPoly> partials;
    partials.reserve(vars.size());
    for (const auto& z : vars) partials.push_back(poly.partial(SlotVar{slot, z}));

    const int nodes = gauss_nodes_for_degree(std::max(0, slot_degree(poly, slot) - 1));
    const auto& rule = gauss_legendre_01(nodes);
    const auto n = from.size();
    std::vector<Eigen::VectorXd> averaged(vars.size(), Eigen::VectorXd::Zero(n));
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double xi = rule.nodes[q];
        others[static_cast<std::size_t>(slot)] = xi * to + (1.0 - xi) * from;
        SlotFields fields(realisation, others);
        for (std::size_t j = 0; j < vars.size(); ++j) averaged[j] += rule.weights[q] * eval_pointwise(partials[j], fields);
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (std::size_t j = 0; j < vars.size(); ++j) out += realisation.op_for(vars[j]).transpose().apply(averaged[j]);
    return out;
}

void add_sandwich(Eigen::MatrixXd& m, const DiffOp& left, const Eigen::VectorXd& c, const DiffOp& right) {
    const auto& grid = left.grid();
    const auto n = static_cast<long long>(grid.n_points());
    for (long long i = 0; i < n; ++i) {
        const double ci = c[static_cast<Eigen::Index>(i)];
        if (ci == 0.0) continue;
        for (const auto& [s, a] : left.stencil()) {
            const auto row = static_cast<Eigen::Index>(grid.wrap(i + s));
            for (const auto& [t, b] : right.stencil())
                m(row, static_cast<Eigen::Index>(grid.wrap(i + t))) += a * ci * b;
        }
    }
}

Eigen::MatrixXd averaged_slot_jacobian(const SlotPoly& poly, int slot, const Eigen::VectorXd& from,
                                       const Eigen::VectorXd& to, std::vector<Eigen::VectorXd> others,
                                       const Realisation& realisation) {
    if (slot < 0 || static_cast<std::size_t>(slot) >= others.size())
        throw InvalidArgument("averaged_slot_jacobian: slot index out of range");
    const auto vars = slot_indeterminates(poly, slot);
    const auto n = from.size();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    const int nodes = gauss_nodes_for_degree(std::max(0, slot_degree(poly, slot) - 1));
    const auto& rule = gauss_legendre_01(nodes);

    std::vector<std::vector<SlotPoly>> second(vars.size(), std::vector<SlotPoly>(vars.size()));
    for (std::size_t j = 0; j < vars.size(); ++j) {
        const auto pj = poly.partial(SlotVar{slot, vars[j]});
        for (std::size_t k = 0; k < vars.size(); ++k) second[j][k] = pj.partial(SlotVar{slot, vars[k]});
    }
    std::vector<std::vector<Eigen::VectorXd>> coeff(vars.size(),
                                                    std::vector<Eigen::VectorXd>(vars.size(), Eigen::VectorXd::Zero(n)));
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double xi = rule.nodes[q];
        others[static_cast<std::size_t>(slot)] = xi * to + (1.0 - xi) * from;
        SlotFields fields(realisation, others);
        for (std::size_t j = 0; j < vars.size(); ++j)
            for (std::size_t k = 0; k < vars.size(); ++k)
                if (!second[j][k].is_zero()) coeff[j][k] += rule.weights[q] * xi * eval_pointwise(second[j][k], fields);
    }
    for (std::size_t j = 0; j < vars.size(); ++j)
        for (std::size_t k = 0; k < vars.size(); ++k)
            if (!second[j][k].is_zero())
                add_sandwich(m, realisation.op_for(vars[j]), coeff[j][k], realisation.op_for(vars[k]));
    return m;
}

Eigen::MatrixXd slot_hessian(const SlotPoly& poly, int slot, const SlotFields& fields) {
    const auto& real = fields.realisation();
    const auto vars = slot_indeterminates(poly, slot);
    const auto n = static_cast<Eigen::Index>(real.grid().n_points());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (const auto& zj : vars) {
        const auto pj = poly.partial(SlotVar{slot, zj});
        for (const auto& zk : vars) {
            const auto pjk = pj.partial(SlotVar{slot, zk});
            if (pjk.is_zero()) continue;
            add_sandwich(m, real.op_for(zj), eval_pointwise(pjk, fields), real.op_for(zk));
        }
    }
    return m;
}

}  // namespace polint
