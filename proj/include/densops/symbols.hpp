#pragma once

#include <map>
#include <string>
#include <vector>

#include "densops/error.hpp"
#include "densops/multipoly.hpp"
#include "densops/operators.hpp"

namespace densops {

/// Polynomial on the cotangent bundle: a finite sum of terms c(x) xi^beta,
/// with the same canonical ordering on xi-monomials as on x-monomials.
class SymbolPoly {
public:
    using TermMap = std::map<Expo, MultiPoly, GradedLexDesc>;

    explicit SymbolPoly(int dim = 0) : dim_(dim) {
        if (dim < 0) throw Error(ErrorCode::Dim, "negative dimension");
    }

    int dim() const { return dim_; }
    bool is_zero() const { return terms_.empty(); }
    const TermMap& terms() const { return terms_; }

    /// Top xi-degree; -1 for zero.
    int degree() const {
        int best = -1;
        for (const auto& [e, c] : terms_) best = std::max(best, static_cast<int>(expo_degree(e)));
        return best;
    }

    void add_term(const Expo& beta, const MultiPoly& c) {
        if (beta.size() != static_cast<size_t>(dim_))
            throw Error(ErrorCode::Dim, "xi multi-index length mismatch");
        if (c.dim() != dim_) throw Error(ErrorCode::Dim, "symbol coefficient dimension mismatch");
        if (c.is_zero()) return;
        auto [it, inserted] = terms_.emplace(beta, c);
        if (!inserted) {
            it->second += c;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    MultiPoly coefficient(const Expo& beta) const {
        auto it = terms_.find(beta);
        return it == terms_.end() ? MultiPoly(dim_) : it->second;
    }

    /// The xi-homogeneous slice of degree k.
    SymbolPoly part_of_degree(int k) const {
        SymbolPoly out(dim_);
        for (const auto& [e, c] : terms_)
            if (static_cast<int>(expo_degree(e)) == k) out.add_term(e, c);
        return out;
    }

    SymbolPoly& operator+=(const SymbolPoly& o) {
        check_dim(o);
        for (const auto& [e, c] : o.terms_) add_term(e, c);
        return *this;
    }
    SymbolPoly& operator-=(const SymbolPoly& o) {
        check_dim(o);
        for (const auto& [e, c] : o.terms_) add_term(e, -c);
        return *this;
    }
    SymbolPoly& operator*=(const Rational& s) {
        if (s == 0) {
            terms_.clear();
            return *this;
        }
        for (auto& [e, c] : terms_) c *= s;
        return *this;
    }
    friend SymbolPoly operator+(SymbolPoly a, const SymbolPoly& b) { return a += b; }
    friend SymbolPoly operator-(SymbolPoly a, const SymbolPoly& b) { return a -= b; }
    friend SymbolPoly operator*(const SymbolPoly& a, const Rational& s) {
        SymbolPoly r = a;
        r *= s;
        return r;
    }
    friend SymbolPoly operator*(const Rational& s, const SymbolPoly& a) { return a * s; }

    friend bool operator==(const SymbolPoly& a, const SymbolPoly& b) {
        return a.dim_ == b.dim_ && a.terms_ == b.terms_;
    }
    friend bool operator!=(const SymbolPoly& a, const SymbolPoly& b) { return !(a == b); }

private:
    void check_dim(const SymbolPoly& o) const {
        if (dim_ != o.dim_) throw Error(ErrorCode::Dim, "symbol dimensions differ");
    }

    int dim_;
    TermMap terms_;
};

/// The xi-degree-k slice of a weight-free operator, read as a symbol.
inline SymbolPoly symbol_of_order(const DensityOperator& a, int k) {
    SymbolPoly out(a.dim());
    for (const auto& [key, c] : a.terms())
        if (key.wpow == 0 && static_cast<int>(expo_degree(key.alpha)) == k)
            out.add_term(key.alpha, c);
    return out;
}

/// Quantization with all coefficients to the left: c xi^beta -> c d^beta.
inline DensityOperator symbol_to_operator(const SymbolPoly& s) {
    DensityOperator out(s.dim());
    for (const auto& [e, c] : s.terms()) out.add_term(e, 0, c);
    return out;
}

/// The divergence contraction sum_i d_{x_i} d_{xi_i} on symbols.
inline SymbolPoly div_contract(const SymbolPoly& s) {
    SymbolPoly out(s.dim());
    for (const auto& [e, c] : s.terms())
        for (size_t i = 0; i < e.size(); ++i) {
            if (e[i] == 0) continue;
            Expo f = e;
            f[i] -= 1;
            out.add_term(f, Rational(e[i]) * c.partial(static_cast<int>(i) + 1));
        }
    return out;
}

/// Normalized r-fold divergence of a xi-homogeneous degree-k symbol:
/// (k-r)!/k! Div^r. These are the building blocks of the projectively
/// equivariant symbol map.
inline SymbolPoly div_series_term(const SymbolPoly& pk, int k, int r) {
    SymbolPoly out = pk;
    for (int i = 0; i < r; ++i) out = div_contract(out);
    Rational factor = rat_factorial(static_cast<unsigned>(k - r)) / rat_factorial(static_cast<unsigned>(k));
    return out * factor;
}

/// Lie derivative of a symbol along a vector field (plain tensor action):
/// L_K p = K^i d_{x_i} p - (d_{x_j} K^i) xi_i d_{xi_j} p.
inline SymbolPoly symbol_lie(const VectorField& k, const SymbolPoly& p) {
    if (k.dim != p.dim()) throw Error(ErrorCode::Dim, "symbol_lie: dimension mismatch");
    const int d = p.dim();
    SymbolPoly out(d);
    for (const auto& [e, c] : p.terms()) {
        // Transport of the coefficient.
        MultiPoly acc(d);
        for (int i = 1; i <= d; ++i) acc += k.comp[static_cast<size_t>(i - 1)] * c.partial(i);
        out.add_term(e, acc);
        // Cotangent action: xi_i d_{xi_j} shifts the exponent from j to i.
        for (size_t j = 0; j < e.size(); ++j) {
            if (e[j] == 0) continue;
            for (int i = 1; i <= d; ++i) {
                MultiPoly dk = k.comp[static_cast<size_t>(i - 1)].partial(static_cast<int>(j) + 1);
                if (dk.is_zero()) continue;
                Expo f = e;
                f[j] -= 1;
                f[static_cast<size_t>(i - 1)] += 1;
                out.add_term(f, -Rational(e[j]) * (dk * c));
            }
        }
    }
    return out;
}

/// Generators of the projective algebra of R^d, in a fixed documented order:
/// first the d translations d_i; then the d^2 linear fields x^a d_b (a-major:
/// all b for a=1, then a=2, ...); finally the d special fields with
/// components K^{(i) j} = x^i x^j.
inline std::vector<VectorField> proj_generators(int d) {
    if (d < 1) throw Error(ErrorCode::Dim, "proj_generators: dimension must be >= 1");
    std::vector<VectorField> gens;
    gens.reserve(static_cast<size_t>(d + d * d + d));
    for (int i = 1; i <= d; ++i) {
        std::vector<MultiPoly> comp(static_cast<size_t>(d), MultiPoly(d));
        comp[static_cast<size_t>(i - 1)] = MultiPoly::constant(d, Rational(1));
        gens.emplace_back(d, std::move(comp));
    }
    for (int a = 1; a <= d; ++a)
        for (int b = 1; b <= d; ++b) {
            std::vector<MultiPoly> comp(static_cast<size_t>(d), MultiPoly(d));
            comp[static_cast<size_t>(b - 1)] = MultiPoly::variable(d, a);
            gens.emplace_back(d, std::move(comp));
        }
    for (int i = 1; i <= d; ++i) {
        std::vector<MultiPoly> comp(static_cast<size_t>(d), MultiPoly(d));
        for (int j = 1; j <= d; ++j)
            comp[static_cast<size_t>(j - 1)] = MultiPoly::variable(d, i) * MultiPoly::variable(d, j);
        gens.emplace_back(d, std::move(comp));
    }
    return gens;
}

/// The d special (quadratic) projective generators alone.
inline std::vector<VectorField> proj_special_generators(int d) {
    auto all = proj_generators(d);
    return std::vector<VectorField>(all.end() - d, all.end());
}

} // namespace densops
