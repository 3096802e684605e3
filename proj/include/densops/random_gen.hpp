#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "densops/multipoly.hpp"
#include "densops/operators.hpp"
#include "densops/pencils.hpp"
#include "densops/symbols.hpp"
#include "densops/volume.hpp"

namespace densops {

/// Deterministic generator of random algebraic inputs for property checks.
/// All draws are exact rationals with small numerators and denominators so
/// that downstream arithmetic stays fast.
class RandomGen {
public:
    explicit RandomGen(std::uint64_t seed) : eng_(seed) {}

    int uniform_int(int lo, int hi) {
        std::uniform_int_distribution<int> dist(lo, hi);
        return dist(eng_);
    }

    /// A rational in [-range, range] with denominator up to den_max; can be 0.
    Rational rational(int range = 5, int den_max = 3) {
        return Rational(uniform_int(-range, range), uniform_int(1, den_max));
    }

    Rational nonzero_rational(int range = 5, int den_max = 3) {
        for (;;) {
            Rational r = rational(range, den_max);
            if (r != 0) return r;
        }
    }

    /// A rational avoiding every entry of the excluded list.
    Rational rational_avoiding(const std::vector<Rational>& excluded, int range = 5,
                               int den_max = 3) {
        for (;;) {
            Rational r = rational(range, den_max);
            bool ok = true;
            for (const auto& e : excluded) ok = ok && r != e;
            if (ok) return r;
        }
    }

    MultiPoly poly(int d, int maxdeg, int nterms = 3) {
        MultiPoly p(d);
        for (int t = 0; t < nterms; ++t) {
            Expo e(static_cast<size_t>(d), 0);
            int deg = uniform_int(0, maxdeg);
            for (int j = 0; j < deg; ++j)
                e[static_cast<size_t>(uniform_int(0, d - 1))] += 1;
            p.add_term(e, rational());
        }
        return p;
    }

    MultiPoly nonzero_poly(int d, int maxdeg, int nterms = 3) {
        for (;;) {
            MultiPoly p = poly(d, maxdeg, nterms);
            if (!p.is_zero()) return p;
        }
    }

    /// Weight-free operator of spatial order <= maxorder.
    DensityOperator wfree_op(int d, int maxorder, int maxdeg, int terms = 4) {
        DensityOperator a(d);
        for (int t = 0; t < terms; ++t) {
            Expo alpha(static_cast<size_t>(d), 0);
            int o = uniform_int(0, maxorder);
            for (int j = 0; j < o; ++j)
                alpha[static_cast<size_t>(uniform_int(0, d - 1))] += 1;
            a.add_term(alpha, 0, poly(d, maxdeg, 2));
        }
        return a;
    }

    /// General operator with weight powers up to maxw.
    DensityOperator general_op(int d, int maxorder, int maxw, int maxdeg, int terms = 4) {
        DensityOperator a(d);
        for (int t = 0; t < terms; ++t) {
            Expo alpha(static_cast<size_t>(d), 0);
            int o = uniform_int(0, maxorder);
            for (int j = 0; j < o; ++j)
                alpha[static_cast<size_t>(uniform_int(0, d - 1))] += 1;
            a.add_term(alpha, static_cast<unsigned>(uniform_int(0, maxw)), poly(d, maxdeg, 2));
        }
        return a;
    }

    VectorField field(int d, int maxdeg) {
        std::vector<MultiPoly> comp;
        comp.reserve(static_cast<size_t>(d));
        for (int i = 0; i < d; ++i) comp.push_back(poly(d, maxdeg, 3));
        return VectorField(d, std::move(comp));
    }

    /// Flat volume structure: gamma is the gradient of a random polynomial,
    /// hence automatically curl-free.
    VolumeStructure flat_volume(int d, int maxdeg) {
        MultiPoly psi = poly(d, maxdeg + 1, 4);
        std::vector<MultiPoly> gamma;
        gamma.reserve(static_cast<size_t>(d));
        for (int i = 1; i <= d; ++i) gamma.push_back(psi.partial(i));
        return VolumeStructure(d, std::move(gamma));
    }

    /// Vector field with vanishing rho-divergence d_i X^i - Gamma_i X^i = 0,
    /// built from an antisymmetric polynomial potential:
    ///   X^i = sum_j (d_j A^{ij} - Gamma_j A^{ij}),  A^{ij} = -A^{ji}.
    /// In one dimension only constant multiples survive when Gamma = 0, and
    /// only the zero field in general.
    VectorField rho_divfree_field(int d, int maxdeg, const VolumeStructure& vol) {
        if (d == 1) {
            bool flat = vol.gamma[0].is_zero();
            std::vector<MultiPoly> comp{flat ? MultiPoly::constant(1, rational())
                                             : MultiPoly(1)};
            return VectorField(1, std::move(comp));
        }
        std::vector<std::vector<MultiPoly>> a(static_cast<size_t>(d),
                                              std::vector<MultiPoly>(static_cast<size_t>(d), MultiPoly(d)));
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) {
                MultiPoly v = poly(d, maxdeg, 3);
                a[static_cast<size_t>(i)][static_cast<size_t>(j)] = v;
                a[static_cast<size_t>(j)][static_cast<size_t>(i)] = -v;
            }
        std::vector<MultiPoly> comp;
        comp.reserve(static_cast<size_t>(d));
        for (int i = 0; i < d; ++i) {
            MultiPoly acc(d);
            for (int j = 0; j < d; ++j) {
                acc += a[static_cast<size_t>(i)][static_cast<size_t>(j)].partial(j + 1);
                acc -= vol.gamma[static_cast<size_t>(j)] * a[static_cast<size_t>(i)][static_cast<size_t>(j)];
            }
            comp.push_back(acc);
        }
        return VectorField(d, std::move(comp));
    }

    SymbolPoly symbol(int d, int maxdeg, int terms = 4) {
        SymbolPoly s(d);
        for (int t = 0; t < terms; ++t) {
            Expo xi(static_cast<size_t>(d), 0);
            int o = uniform_int(0, maxdeg);
            for (int j = 0; j < o; ++j)
                xi[static_cast<size_t>(uniform_int(0, d - 1))] += 1;
            s.add_term(xi, poly(d, maxdeg, 2));
        }
        return s;
    }

    QuasiDensity quasidensity(int d, int maxdeg, int nparts = 2) {
        QuasiDensity q(d);
        for (int t = 0; t < nparts; ++t) q.add_part(rational(), poly(d, maxdeg, 2));
        return q;
    }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

} // namespace densops
