#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

namespace polint {

/// Sparse multivariate polynomial with real coefficients over an ordered variable type.
///
/// Terms are keyed by their sorted factor list (variable, exponent), so two polynomials built
/// from the same terms in any order compare equal. Exactly-zero coefficients are dropped.
template <class Var>
class Polynomial {
public:
    using Factor = std::pair<Var, int>;
    using Key = std::vector<Factor>;
    using TermMap = std::map<Key, double>;

    Polynomial() = default;

    static Polynomial constant(double c) {
        Polynomial p;
        p.add_term(c, {});
        return p;
    }

    static Polynomial variable(const Var& v, double coeff = 1.0) {
        Polynomial p;
        p.add_term(coeff, {{v, 1}});
        return p;
    }

    /// Adds coeff * prod(factors); factors may be unsorted and repeat variables.
    void add_term(double coeff, Key factors) {
        if (coeff == 0.0) return;
        Key key = canonical(std::move(factors));
        auto [it, inserted] = terms_.try_emplace(std::move(key), coeff);
        if (!inserted) {
            it->second += coeff;
            if (it->second == 0.0) terms_.erase(it);
        }
    }

    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    static int key_degree(const Key& key) {
        int d = 0;
        for (const auto& f : key) d += f.second;
        return d;
    }

    int degree() const {
        int d = 0;
        for (const auto& [k, c] : terms_) d = std::max(d, key_degree(k));
        return d;
    }

    /// Largest total exponent among variables selected by pred.
    template <class Pred>
    int degree_in(Pred&& pred) const {
        int d = 0;
        for (const auto& [k, c] : terms_) {
            int dk = 0;
            for (const auto& [v, e] : k)
                if (pred(v)) dk += e;
            d = std::max(d, dk);
        }
        return d;
    }

    Polynomial partial(const Var& v) const {
        Polynomial out;
        for (const auto& [key, c] : terms_) {
            auto it = std::find_if(key.begin(), key.end(), [&](const Factor& f) { return f.first == v; });
            if (it == key.end()) continue;
            Key k = key;
            auto pos = k.begin() + (it - key.begin());
            const int e = pos->second;
            if (e == 1)
                k.erase(pos);
            else
                pos->second = e - 1;
            out.add_term(c * e, std::move(k));
        }
        return out;
    }

    /// Renames variables through f; colliding names merge.
    template <class OtherVar, class F>
    Polynomial<OtherVar> map_vars(F&& f) const {
        Polynomial<OtherVar> out;
        for (const auto& [key, c] : terms_) {
            typename Polynomial<OtherVar>::Key k;
            k.reserve(key.size());
            for (const auto& [v, e] : key) k.emplace_back(f(v), e);
            out.add_term(c, std::move(k));
        }
        return out;
    }

    template <class Pred>
    Polynomial filter_terms(Pred&& pred) const {
        Polynomial out;
        for (const auto& [key, c] : terms_)
            if (pred(key, c)) out.add_term(c, key);
        return out;
    }

    Polynomial& operator+=(const Polynomial& o) {
        for (const auto& [k, c] : o.terms_) add_term(c, k);
        return *this;
    }
    Polynomial& operator-=(const Polynomial& o) {
        for (const auto& [k, c] : o.terms_) add_term(-c, k);
        return *this;
    }
    Polynomial& operator*=(double s) {
        if (s == 0.0) {
            terms_.clear();
            return *this;
        }
        for (auto& [k, c] : terms_) c *= s;
        return *this;
    }

    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator-(Polynomial a) { return a *= -1.0; }
    friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
    friend Polynomial operator*(Polynomial a, double s) { return a *= s; }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        Polynomial out;
        for (const auto& [ka, ca] : a.terms_)
            for (const auto& [kb, cb] : b.terms_) {
                Key k = ka;
                k.insert(k.end(), kb.begin(), kb.end());
                out.add_term(ca * cb, std::move(k));
            }
        return out;
    }

    Polynomial pow(int e) const {
        Polynomial out = constant(1.0);
        for (int i = 0; i < e; ++i) out = out * *this;
        return out;
    }

    bool operator==(const Polynomial& o) const = default;

    /// Same support and coefficients within tol * max(1, |c|).
    bool approx_equal(const Polynomial& o, double tol) const {
        auto close = [&](double a, double b) { return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)}); };
        for (const auto& [k, c] : terms_) {
            auto it = o.terms_.find(k);
            if (!close(c, it == o.terms_.end() ? 0.0 : it->second)) return false;
        }
        for (const auto& [k, c] : o.terms_)
            if (!terms_.contains(k) && !close(c, 0.0)) return false;
        return true;
    }

    static Key canonical(Key factors) {
        std::sort(factors.begin(), factors.end(), [](const Factor& a, const Factor& b) { return a.first < b.first; });
        Key out;
        for (auto& f : factors) {
            if (f.second == 0) continue;
            if (!out.empty() && out.back().first == f.first)
                out.back().second += f.second;
            else
                out.push_back(std::move(f));
        }
        return out;
    }

private:
    TermMap terms_;
};

}  // namespace polint
