#pragma once

#include <string>
#include <vector>

#include "densops/error.hpp"
#include "densops/operators.hpp"
#include "densops/pencils.hpp"

namespace densops {

/// The connection attached to a volume form rho: gamma_i = d_i log rho. It
/// is flat, so gamma must be curl-free; construction enforces this.
struct VolumeStructure {
    int dim = 0;
    std::vector<MultiPoly> gamma;

    VolumeStructure(int d, std::vector<MultiPoly> g) : dim(d), gamma(std::move(g)) {
        if (gamma.size() != static_cast<size_t>(dim))
            throw Error(ErrorCode::Dim, "volume structure needs one gamma component per dimension");
        for (const auto& c : gamma)
            if (c.dim() != dim) throw Error(ErrorCode::Dim, "gamma component dimension mismatch");
        for (int i = 1; i <= dim; ++i)
            for (int j = i + 1; j <= dim; ++j)
                if (!(gamma[static_cast<size_t>(i - 1)].partial(j) ==
                      gamma[static_cast<size_t>(j - 1)].partial(i)))
                    throw Error(ErrorCode::ExcludedParam,
                                "volume structure: gamma must be curl-free (d_" + std::to_string(j) +
                                    " gamma_" + std::to_string(i) + " != d_" + std::to_string(i) +
                                    " gamma_" + std::to_string(j) + ")");
    }

    /// Views the volume's flat connection as plain connection data.
    Connection connection() const { return Connection(dim, gamma); }
};

/// Equivariant lift of a weight-free operator acting on weight-lam densities
/// with respect to the volume-preserving subalgebra of the chosen volume:
/// each coefficient stays in place and every d_i is replaced by the
/// covariant factor d_i + (w - lam) Gamma_i. The factors commute because
/// Gamma is curl-free, so the product order is immaterial.
inline DensityOperator volume_lift(const DensityOperator& delta, const Rational& lam,
                                   const VolumeStructure& vol) {
    detail::require_weight_free(delta, "volume_lift");
    if (delta.dim() != vol.dim) throw Error(ErrorCode::Dim, "volume_lift: dimension mismatch");
    const int d = delta.dim();

    std::vector<DensityOperator> factor;
    factor.reserve(static_cast<size_t>(d));
    for (int i = 1; i <= d; ++i) {
        DensityOperator f = DensityOperator::partial_op(d, i) +
                            mul_wpoly(LambdaPoly(std::vector<Rational>{-lam, Rational(1)}),
                                      DensityOperator::from_poly(vol.gamma[static_cast<size_t>(i - 1)]));
        factor.push_back(std::move(f));
    }

    DensityOperator out(d);
    for (const auto& [k, c] : delta.terms()) {
        DensityOperator acc = DensityOperator::from_poly(c);
        for (size_t i = 0; i < k.alpha.size(); ++i)
            for (unsigned e = 0; e < k.alpha[i]; ++e) acc = compose(acc, factor[i]);
        out += acc;
    }
    return out;
}

/// Formal adjoint of a weight-free operator with respect to the volume rho:
/// c d^alpha  maps to  (-1)^{|alpha|} prod_i (d_i - Gamma_i)^{alpha_i} c.
/// An involution; the input must be weight-free.
inline DensityOperator rho_adjoint(const DensityOperator& delta, const VolumeStructure& vol) {
    if (!delta.is_weight_free())
        throw Error(ErrorCode::Order, "rho_adjoint: expected a weight-free operator");
    if (delta.dim() != vol.dim) throw Error(ErrorCode::Dim, "rho_adjoint: dimension mismatch");
    const int d = delta.dim();

    std::vector<DensityOperator> factor;
    factor.reserve(static_cast<size_t>(d));
    for (int i = 1; i <= d; ++i)
        factor.push_back(DensityOperator::partial_op(d, i) -
                         DensityOperator::from_poly(vol.gamma[static_cast<size_t>(i - 1)]));

    DensityOperator out(d);
    for (const auto& [k, c] : delta.terms()) {
        DensityOperator acc = DensityOperator::from_poly(c);
        for (size_t i = 0; i < k.alpha.size(); ++i)
            for (unsigned e = 0; e < k.alpha[i]; ++e) acc = compose(factor[i], acc);
        if (expo_degree(k.alpha) % 2 == 1) acc *= Rational(-1);
        out += acc;
    }
    return out;
}

/// Parameters of the general equivariant family of liftings of order-n
/// operators: the scalar b and the coefficient lists c_1..c_n, d_1..d_n of
/// the vertical corrections.
struct SdiffFamilyParams {
    int n = 0;
    Rational lam;
    Rational b;
    std::vector<Rational> c; // c[k-1] multiplies (w - lam)^k against P(1)
    std::vector<Rational> d; // d[k-1] multiplies (w - lam)^k against P*(1)
};

namespace detail {

/// The weight-0 polynomial a(1) for an operator preserving weight 0.
inline MultiPoly apply_to_unit(const DensityOperator& a) {
    return apply(a, QuasiDensity::unit(a.dim())).part(Rational(0));
}

} // namespace detail

/// The full equivariant family of liftings for the volume-preserving
/// subalgebra: with P the volume lift of delta and P* its adjoint,
///   (1 - b (w - lam)) P + (-1)^n b (w - lam) P*
///     + sum_k c_k (w - lam)^k P(1) + sum_k d_k (w - lam)^k P*(1).
inline DensityOperator sdiff_family_lift(const DensityOperator& delta,
                                         const SdiffFamilyParams& params,
                                         const VolumeStructure& vol) {
    detail::require_weight_free(delta, "sdiff_family_lift");
    if (params.n < 0) throw Error(ErrorCode::Order, "sdiff_family_lift: negative order");
    detail::require_order_at_most(delta, params.n, "sdiff_family_lift");
    if (params.c.size() != static_cast<size_t>(params.n) ||
        params.d.size() != static_cast<size_t>(params.n))
        throw Error(ErrorCode::ExcludedParam,
                    "sdiff_family_lift: expected n coefficients in each of c and d");

    const Rational lam = params.lam;
    const Rational sign = (params.n % 2 == 0) ? Rational(1) : Rational(-1);
    DensityOperator p = volume_lift(delta, lam, vol);
    DensityOperator ps = adjoint(p);
    MultiPoly p1 = detail::apply_to_unit(p);
    MultiPoly ps1 = detail::apply_to_unit(ps);

    const LambdaPoly shift(std::vector<Rational>{-lam, Rational(1)}); // w - lam
    LambdaPoly acoef = LambdaPoly(Rational(1)) - params.b * shift;
    LambdaPoly bcoef = (sign * params.b) * shift;
    LambdaPoly ccoef, dcoef;
    for (int k = 1; k <= params.n; ++k) {
        LambdaPoly pw = shift.pow(static_cast<unsigned>(k));
        ccoef += params.c[static_cast<size_t>(k - 1)] * pw;
        dcoef += params.d[static_cast<size_t>(k - 1)] * pw;
    }

    return mul_wpoly(acoef, p) + mul_wpoly(bcoef, ps) +
           mul_wpoly(ccoef, DensityOperator::from_poly(p1)) +
           mul_wpoly(dcoef, DensityOperator::from_poly(ps1));
}

/// The distinguished member of the family: for order-n input,
///   (w + lam - 1)/(2 lam - 1) P + (-1)^n (lam - w)/(2 lam - 1) P*.
/// Self-adjoint up to the sign (-1)^n, and independent of the chosen volume
/// up to operators that lower order by at least two. Singular at lam = 1/2.
inline DensityOperator distinguished_lift(const DensityOperator& delta, int n, const Rational& lam,
                                          const VolumeStructure& vol) {
    detail::require_weight_free(delta, "distinguished_lift");
    if (n < 0) throw Error(ErrorCode::Order, "distinguished_lift: negative order");
    detail::require_order_at_most(delta, n, "distinguished_lift");
    if (lam == Rational(1, 2))
        throw Error(ErrorCode::SingularWeight, "distinguished_lift: weight 1/2 is excluded");

    const Rational inv = Rational(1) / (Rational(2) * lam - 1);
    const Rational sign = (n % 2 == 0) ? Rational(1) : Rational(-1);
    DensityOperator p = volume_lift(delta, lam, vol);
    DensityOperator ps = adjoint(p);
    LambdaPoly acoef(std::vector<Rational>{(lam - 1) * inv, inv});
    LambdaPoly bcoef(std::vector<Rational>{sign * lam * inv, -sign * inv});
    return mul_wpoly(acoef, p) + mul_wpoly(bcoef, ps);
}

} // namespace densops
