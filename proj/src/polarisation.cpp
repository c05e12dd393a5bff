#include "polint/polarisation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "json.hpp"

namespace polint {

PolarisedDensity::PolarisedDensity(int k, double theta, SlotPoly poly) : k_(k), theta_(theta), poly_(std::move(poly)) {
    if (k < 1) throw InvalidArgument("PolarisedDensity: k must be positive");
    for (const auto& [key, c] : poly_.terms())
        for (const auto& [v, e] : key)
            if (v.slot < 0 || v.slot >= k) throw InvalidArgument("PolarisedDensity: slot index out of range");
}

std::vector<PolarisedMonomial> PolarisedDensity::terms() const {
    std::vector<PolarisedMonomial> out;
    for (const auto& [key, c] : poly_.terms()) {
        PolarisedMonomial m{c, std::vector<std::vector<std::pair<Indeterminate, int>>>(static_cast<std::size_t>(k_))};
        for (const auto& [v, e] : key) m.per_slot_factors[static_cast<std::size_t>(v.slot)].emplace_back(v.var, e);
        out.push_back(std::move(m));
    }
    return out;
}

int PolarisedDensity::max_slot_degree() const {
    int d = 0;
    for (int s = 0; s < k_; ++s) d = std::max(d, poly_.degree_in([s](const SlotVar& v) { return v.slot == s; }));
    return d;
}

PolarisedDensity PolarisedDensity::shifted() const {
    const int k = k_;
    auto moved = poly_.map_vars<SlotVar>([k](const SlotVar& v) { return SlotVar{(v.slot + k - 1) % k, v.var}; });
    return PolarisedDensity(k_, theta_, std::move(moved));
}

bool PolarisedDensity::is_cyclic(double tol) const { return shifted().poly().approx_equal(poly_, tol); }

std::string PolarisedDensity::to_json() const {
    nlohmann::json j;
    j["k"] = k_;
    j["theta"] = theta_;
    j["terms"] = nlohmann::json::array();
    for (const auto& m : terms()) {
        nlohmann::json slots = nlohmann::json::array();
        for (const auto& factors : m.per_slot_factors) {
            nlohmann::json s = nlohmann::json::array();
            for (const auto& [z, e] : factors) s.push_back({{"var", to_string(z)}, {"exp", e}});
            slots.push_back(std::move(s));
        }
        j["terms"].push_back({{"coeff", m.coeff}, {"slots", std::move(slots)}});
    }
    return j.dump(2);
}

namespace {

/// (c/k) Σ_shifts of the placement (factor group g sits in slot g).
void add_cyclic_average(SlotPoly& out, double c, int k, const std::vector<std::vector<Indeterminate>>& groups) {
    for (int shift = 0; shift < k; ++shift) {
        SlotPoly::Key key;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            const int slot = (static_cast<int>(g) + shift) % k;
            for (const auto& z : groups[g]) key.emplace_back(SlotVar{slot, z}, 1);
        }
        out.add_term(c / k, std::move(key));
    }
}

}  // namespace

PolarisedDensity polarise(const DensityPoly& density, int k, double theta, const FactorOrder& order) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidArgument("polarise: theta must lie in [0, 1]");
    const int p = density.degree();
    if (k < 1 || k < (p + 1) / 2)
        throw InvalidArgument("polarise: k = " + std::to_string(k) + " is too small for degree " + std::to_string(p));

    SlotPoly out;
    for (const auto& m : density.terms()) {
        std::vector<Indeterminate> factors;
        for (const auto& [z, e] : m.factors)
            for (int i = 0; i < e; ++i) factors.push_back(z);
        if (order) factors = order(std::move(factors));

        if (factors.empty()) {
            out.add_term(m.coeff, {});
            continue;
        }
        if (factors.size() == 2 && k >= 2) {
            add_cyclic_average(out, theta * m.coeff, k, {{factors[0], factors[1]}});
            add_cyclic_average(out, (1.0 - theta) * m.coeff, k, {{factors[0]}, {factors[1]}});
            continue;
        }
        std::vector<std::vector<Indeterminate>> groups;
        for (std::size_t i = 0; i < factors.size(); i += 2) {
            std::vector<Indeterminate> g{factors[i]};
            if (i + 1 < factors.size()) g.push_back(factors[i + 1]);
            groups.push_back(std::move(g));
        }
        add_cyclic_average(out, m.coeff, k, groups);
    }
    return PolarisedDensity(k, theta, std::move(out));
}

DensityPoly collapse(const PolarisedDensity& pd) {
    // Contributions to one monomial are summed in extended precision, smallest first, and rounded once,
    // so the result does not depend on term order.
    std::map<DensityPoly::Poly::Key, std::vector<double>> parts;
    for (const auto& [key, c] : pd.poly().terms()) {
        DensityPoly::Poly::Key k;
        for (const auto& [v, e] : key) k.emplace_back(v.var, e);
        DensityPoly::Poly single;
        single.add_term(1.0, std::move(k));
        parts[single.terms().begin()->first].push_back(c);
    }
    DensityPoly::Poly out;
    for (auto& [key, cs] : parts) {
        std::sort(cs.begin(), cs.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
        long double sum = 0.0L;
        for (double c : cs) sum += c;
        out.add_term(static_cast<double>(sum), key);
    }
    return DensityPoly(std::move(out));
}

double eval_polarised(const PolarisedDensity& pd, std::span<const GridFunction> ws, const Realisation& realisation) {
    if (ws.size() != static_cast<std::size_t>(pd.k()))
        throw InvalidArgument("eval_polarised: expected " + std::to_string(pd.k()) + " arguments");
    std::vector<Eigen::VectorXd> values;
    for (const auto& w : ws) {
        require_same_grid(w.grid(), realisation.grid(), "eval_polarised");
        values.push_back(w.values());
    }
    SlotFields fields(realisation, std::move(values));
    return eval_pointwise(pd.poly(), fields).sum() * realisation.grid().dx();
}

DensityPoly gkdv_density(int p) {
    if (p < 1) throw InvalidArgument("gkdv_density: p must be positive");
    DensityPoly::Poly poly;
    poly.add_term(0.5, {{Indeterminate{1, 0}, 2}});
    poly.add_term(-1.0 / p, {{Indeterminate{0, 0}, p}});
    return DensityPoly(std::move(poly));
}

PolarisedDensity polarise_gkdv(int p, double theta) {
    if (p < 3) throw InvalidArgument("polarise_gkdv: p must be at least 3");
    if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidArgument("polarise_gkdv: theta must lie in [0, 1]");
    const int k = (p + 1) / 2;
    const Indeterminate u{0, 0};
    const Indeterminate ux{1, 0};
    SlotPoly g;

    if (k == 2) {
        // ½ [θ (u_x² + v_x²)/2 + (1 − θ) u_x v_x]
        g.add_term(0.25 * theta, {{SlotVar{0, ux}, 2}});
        g.add_term(0.25 * theta, {{SlotVar{1, ux}, 2}});
        g.add_term(0.5 * (1.0 - theta), {{SlotVar{0, ux}, 1}, {SlotVar{1, ux}, 1}});
    } else {
        for (int i = 0; i < k; ++i) g.add_term(1.0 / (2.0 * k), {{SlotVar{i, ux}, 2}});
    }

    if (p % 2 == 1) {
        for (int i = 0; i < k; ++i) {
            SlotPoly::Key key;
            for (int j = 0; j < k; ++j) key.emplace_back(SlotVar{j, u}, j == i ? 1 : 2);
            g.add_term(-1.0 / (static_cast<double>(p) * k), std::move(key));
        }
    } else {
        SlotPoly::Key key;
        for (int j = 0; j < k; ++j) key.emplace_back(SlotVar{j, u}, 2);
        g.add_term(-1.0 / p, std::move(key));
    }
    return PolarisedDensity(k, theta, std::move(g));
}

}  // namespace polint
