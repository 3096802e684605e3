#pragma once

#include <string>
#include <vector>

#include "densops/error.hpp"
#include "densops/rational.hpp"

namespace densops {

/// Univariate polynomial with exact rational coefficients, used for
/// weight-parameter dependence (polynomials in a weight lambda or in the
/// central weight operator). Coefficients are stored in ascending powers
/// and trailing zeros are trimmed, so equality is structural.
class LambdaPoly {
public:
    LambdaPoly() = default;
    /*implicit*/ LambdaPoly(const Rational& c) {
        if (c != 0) c_.push_back(c);
    }
    explicit LambdaPoly(std::vector<Rational> ascending) : c_(std::move(ascending)) { trim(); }

    static LambdaPoly variable() { return LambdaPoly(std::vector<Rational>{Rational(0), Rational(1)}); }
    static LambdaPoly monomial(unsigned j, const Rational& c = Rational(1)) {
        std::vector<Rational> v(j + 1, Rational(0));
        v[j] = c;
        return LambdaPoly(std::move(v));
    }

    /// Degree; -1 for the zero polynomial.
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }

    Rational coeff(unsigned j) const {
        return j < c_.size() ? c_[j] : Rational(0);
    }
    const std::vector<Rational>& coeffs() const { return c_; }

    Rational eval(const Rational& t) const {
        Rational acc(0);
        for (size_t j = c_.size(); j-- > 0;) acc = acc * t + c_[j];
        return acc;
    }

    LambdaPoly& operator+=(const LambdaPoly& o) {
        if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), Rational(0));
        for (size_t j = 0; j < o.c_.size(); ++j) c_[j] += o.c_[j];
        trim();
        return *this;
    }
    LambdaPoly& operator-=(const LambdaPoly& o) {
        if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), Rational(0));
        for (size_t j = 0; j < o.c_.size(); ++j) c_[j] -= o.c_[j];
        trim();
        return *this;
    }
    LambdaPoly& operator*=(const Rational& s) {
        if (s == 0) {
            c_.clear();
            return *this;
        }
        for (auto& a : c_) a *= s;
        return *this;
    }

    friend LambdaPoly operator+(LambdaPoly a, const LambdaPoly& b) { return a += b; }
    friend LambdaPoly operator-(LambdaPoly a, const LambdaPoly& b) { return a -= b; }
    friend LambdaPoly operator-(const LambdaPoly& a) {
        LambdaPoly r = a;
        for (auto& c : r.c_) c = -c;
        return r;
    }
    friend LambdaPoly operator*(const LambdaPoly& a, const Rational& s) {
        LambdaPoly r = a;
        r *= s;
        return r;
    }
    friend LambdaPoly operator*(const Rational& s, const LambdaPoly& a) { return a * s; }

    friend LambdaPoly operator*(const LambdaPoly& a, const LambdaPoly& b) {
        if (a.is_zero() || b.is_zero()) return LambdaPoly();
        std::vector<Rational> v(a.c_.size() + b.c_.size() - 1, Rational(0));
        for (size_t i = 0; i < a.c_.size(); ++i)
            for (size_t j = 0; j < b.c_.size(); ++j) v[i + j] += a.c_[i] * b.c_[j];
        return LambdaPoly(std::move(v));
    }

    friend bool operator==(const LambdaPoly& a, const LambdaPoly& b) { return a.c_ == b.c_; }
    friend bool operator!=(const LambdaPoly& a, const LambdaPoly& b) { return !(a == b); }

    LambdaPoly pow(unsigned e) const {
        LambdaPoly acc(Rational(1));
        for (unsigned i = 0; i < e; ++i) acc = acc * (*this);
        return acc;
    }

    /// P(a*t + b) as a polynomial in t.
    LambdaPoly compose_affine(const Rational& a, const Rational& b) const {
        LambdaPoly arg(std::vector<Rational>{b, a});
        LambdaPoly acc;
        for (size_t j = c_.size(); j-- > 0;) acc = acc * arg + LambdaPoly(c_[j]);
        return acc;
    }

    /// Text form in the given variable name, e.g. "2*w^2 - w + 1/3".
    std::string str(const std::string& var = "w") const {
        if (c_.empty()) return "0";
        std::string out;
        bool first = true;
        for (size_t j = c_.size(); j-- > 0;) {
            if (c_[j] == 0) continue;
            Rational a = c_[j];
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
            if (j == 0) {
                out += rational_to_string(a);
            } else {
                if (a != 1) {
                    out += rational_to_string(a);
                    out += '*';
                }
                out += var;
                if (j > 1) {
                    out += '^';
                    out += std::to_string(j);
                }
            }
        }
        return out;
    }

private:
    void trim() {
        while (!c_.empty() && c_.back() == 0) c_.pop_back();
    }

    std::vector<Rational> c_;
};

} // namespace densops
