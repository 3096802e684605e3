#pragma once

#include <map>
#include <string>
#include <vector>

#include "densops/error.hpp"
#include "densops/rational.hpp"

namespace densops {

/// Exponent vector of a monomial in x1..xd (one entry per variable).
using Expo = std::vector<unsigned>;

inline unsigned expo_degree(const Expo& e) {
    unsigned d = 0;
    for (unsigned v : e) d += v;
    return d;
}

/// Canonical monomial order: higher total degree first, ties broken
/// lexicographically with the x1 exponent most significant (so, in two
/// variables, x1^2 precedes x1*x2 precedes x2^2).
struct GradedLexDesc {
    bool operator()(const Expo& a, const Expo& b) const {
        unsigned da = expo_degree(a), db = expo_degree(b);
        if (da != db) return da > db;
        return a > b; // lexicographic on exponents, larger first
    }
};

/// Multivariate polynomial in x1..xd with exact rational coefficients.
/// Terms are kept in canonical order and zero coefficients are pruned,
/// so operator== is structural equality of values.
class MultiPoly {
public:
    using TermMap = std::map<Expo, Rational, GradedLexDesc>;

    explicit MultiPoly(int dim = 0) : dim_(dim) {
        if (dim < 0) throw Error(ErrorCode::Dim, "negative dimension");
    }

    static MultiPoly constant(int dim, const Rational& c) {
        MultiPoly p(dim);
        p.add_term(Expo(static_cast<size_t>(dim), 0), c);
        return p;
    }

    /// x_i, with i in 1..dim.
    static MultiPoly variable(int dim, int i) {
        MultiPoly p(dim);
        Expo e(static_cast<size_t>(dim), 0);
        p.check_var(i);
        e[static_cast<size_t>(i - 1)] = 1;
        p.add_term(e, Rational(1));
        return p;
    }

    static MultiPoly monomial(int dim, const Expo& e, const Rational& c) {
        MultiPoly p(dim);
        p.add_term(e, c);
        return p;
    }

    int dim() const { return dim_; }
    bool is_zero() const { return terms_.empty(); }
    const TermMap& terms() const { return terms_; }

    /// Total degree; -1 for the zero polynomial.
    int degree() const {
        if (terms_.empty()) return -1;
        // first key has maximal degree under GradedLexDesc
        return static_cast<int>(expo_degree(terms_.begin()->first));
    }

    Rational coefficient(const Expo& e) const {
        auto it = terms_.find(e);
        return it == terms_.end() ? Rational(0) : it->second;
    }

    void add_term(const Expo& e, const Rational& c) {
        if (e.size() != static_cast<size_t>(dim_))
            throw Error(ErrorCode::Dim, "exponent length does not match dimension");
        if (c == 0) return;
        auto [it, inserted] = terms_.emplace(e, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    MultiPoly& operator+=(const MultiPoly& o) {
        check_dim(o);
        for (const auto& [e, c] : o.terms_) add_term(e, c);
        return *this;
    }
    MultiPoly& operator-=(const MultiPoly& o) {
        check_dim(o);
        for (const auto& [e, c] : o.terms_) add_term(e, -c);
        return *this;
    }
    MultiPoly& operator*=(const Rational& s) {
        if (s == 0) {
            terms_.clear();
            return *this;
        }
        for (auto& [e, c] : terms_) c *= s;
        return *this;
    }
    MultiPoly& operator*=(const MultiPoly& o) {
        *this = *this * o;
        return *this;
    }

    friend MultiPoly operator+(MultiPoly a, const MultiPoly& b) { return a += b; }
    friend MultiPoly operator-(MultiPoly a, const MultiPoly& b) { return a -= b; }
    friend MultiPoly operator-(const MultiPoly& a) {
        MultiPoly r(a.dim_);
        for (const auto& [e, c] : a.terms_) r.terms_.emplace(e, -c);
        return r;
    }
    friend MultiPoly operator*(const MultiPoly& a, const Rational& s) {
        MultiPoly r = a;
        r *= s;
        return r;
    }
    friend MultiPoly operator*(const Rational& s, const MultiPoly& a) { return a * s; }

    friend MultiPoly operator*(const MultiPoly& a, const MultiPoly& b) {
        a.check_dim(b);
        MultiPoly r(a.dim_);
        for (const auto& [ea, ca] : a.terms_)
            for (const auto& [eb, cb] : b.terms_) {
                Expo e = ea;
                for (size_t i = 0; i < e.size(); ++i) e[i] += eb[i];
                r.add_term(e, ca * cb);
            }
        return r;
    }

    friend bool operator==(const MultiPoly& a, const MultiPoly& b) {
        return a.dim_ == b.dim_ && a.terms_ == b.terms_;
    }
    friend bool operator!=(const MultiPoly& a, const MultiPoly& b) { return !(a == b); }

    /// Order on polynomials (dimension, then term list); lets MultiPoly key maps.
    friend bool operator<(const MultiPoly& a, const MultiPoly& b) {
        if (a.dim_ != b.dim_) return a.dim_ < b.dim_;
        return std::lexicographical_compare(
            a.terms_.begin(), a.terms_.end(), b.terms_.begin(), b.terms_.end(),
            [](const auto& x, const auto& y) {
                GradedLexDesc lt;
                if (lt(x.first, y.first)) return true;
                if (lt(y.first, x.first)) return false;
                return x.second < y.second;
            });
    }

    /// Partial derivative with respect to x_i, i in 1..dim.
    MultiPoly partial(int i) const {
        check_var(i);
        size_t idx = static_cast<size_t>(i - 1);
        MultiPoly r(dim_);
        for (const auto& [e, c] : terms_) {
            if (e[idx] == 0) continue;
            Expo f = e;
            unsigned k = f[idx];
            f[idx] -= 1;
            r.add_term(f, c * Rational(k));
        }
        return r;
    }

    /// Iterated partial derivative: apply (d/dx_i)^{a_i} for every i.
    MultiPoly partial_multi(const Expo& a) const {
        if (a.size() != static_cast<size_t>(dim_))
            throw Error(ErrorCode::Dim, "derivative multi-index length mismatch");
        MultiPoly r = *this;
        for (size_t i = 0; i < a.size(); ++i)
            for (unsigned k = 0; k < a[i]; ++k) {
                r = r.partial(static_cast<int>(i) + 1);
                if (r.is_zero()) return r;
            }
        return r;
    }

    Rational eval(const std::vector<Rational>& x) const {
        if (x.size() != static_cast<size_t>(dim_))
            throw Error(ErrorCode::Dim, "evaluation point length mismatch");
        Rational acc(0);
        for (const auto& [e, c] : terms_) {
            Rational t = c;
            for (size_t i = 0; i < e.size(); ++i)
                if (e[i] > 0) t *= rat_pow(x[i], e[i]);
            acc += t;
        }
        return acc;
    }

    /// Canonical text form, e.g. "3/2*x1^2*x2 - x3" or "0".
    std::string str() const {
        if (terms_.empty()) return "0";
        std::string out;
        bool first = true;
        for (const auto& [e, c] : terms_) {
            Rational a = c;
            if (first) {
                if (a < 0) {
                    out += '-';
                    a = -a;
                }
                first = false;
            } else {
                out += (a < 0) ? " - " : " + ";
                if (a < 0) a = -a;
            }
            std::string mono = monomial_str(e);
            if (mono.empty()) {
                out += rational_to_string(a);
            } else {
                if (a != 1) {
                    out += rational_to_string(a);
                    out += '*';
                }
                out += mono;
            }
        }
        return out;
    }

private:
    static std::string monomial_str(const Expo& e) {
        std::string s;
        for (size_t i = 0; i < e.size(); ++i) {
            if (e[i] == 0) continue;
            if (!s.empty()) s += '*';
            s += 'x';
            s += std::to_string(i + 1);
            if (e[i] > 1) {
                s += '^';
                s += std::to_string(e[i]);
            }
        }
        return s;
    }

    void check_dim(const MultiPoly& o) const {
        if (dim_ != o.dim_)
            throw Error(ErrorCode::Dim, "polynomial dimensions differ (" +
                                            std::to_string(dim_) + " vs " +
                                            std::to_string(o.dim_) + ")");
    }
    void check_var(int i) const {
        if (i < 1 || i > dim_)
            throw Error(ErrorCode::Dim, "variable index " + std::to_string(i) +
                                            " outside 1.." + std::to_string(dim_));
    }

    int dim_;
    TermMap terms_;
};

} // namespace densops
