#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>

#include "densops/error.hpp"

namespace densops {

/// Arbitrary-precision integer used throughout the exact kernel.
using Int = boost::multiprecision::cpp_int;

/// Exact rational scalar: always stored reduced with positive denominator.
using Rational = boost::multiprecision::cpp_rational;

inline Rational make_rational(long long num, long long den = 1) {
    if (den == 0) throw Error(ErrorCode::ExcludedParam, "rational with zero denominator");
    return Rational(Int(num), Int(den));
}

/// base^e for integer e (negative e inverts; 0^negative is an error).
inline Rational rat_pow(const Rational& base, long long e) {
    if (e == 0) return Rational(1);
    bool invert = e < 0;
    unsigned long long n = invert ? static_cast<unsigned long long>(-e)
                                  : static_cast<unsigned long long>(e);
    if (invert && base == 0)
        throw Error(ErrorCode::ExcludedParam, "negative power of zero");
    Rational acc(1), sq = base;
    while (n > 0) {
        if (n & 1ULL) acc *= sq;
        if ((n >>= 1) != 0) sq *= sq;
    }
    return invert ? Rational(1) / acc : acc;
}

/// Canonical text form: "n" for integers, otherwise "n/d" with d > 0.
inline std::string rational_to_string(const Rational& r) {
    const Int num = boost::multiprecision::numerator(r);
    const Int den = boost::multiprecision::denominator(r);
    std::string s = num.str();
    if (den != 1) {
        s += '/';
        s += den.str();
    }
    return s;
}

/// Exact integer factorial as a Rational (small n only).
inline Rational rat_factorial(unsigned n) {
    Int acc = 1;
    for (unsigned i = 2; i <= n; ++i) acc *= i;
    return Rational(acc);
}

/// Binomial coefficient C(n, k) as a Rational.
inline Rational rat_binomial(unsigned n, unsigned k) {
    if (k > n) return Rational(0);
    if (k > n - k) k = n - k;
    Int num = 1, den = 1;
    for (unsigned i = 0; i < k; ++i) {
        num *= Int(n - i);
        den *= Int(i + 1);
    }
    return Rational(num, den);
}

} // namespace densops
