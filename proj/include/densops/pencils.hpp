#pragma once

#include <string>
#include <vector>

#include "densops/error.hpp"
#include "densops/operators.hpp"

namespace densops {

namespace detail {

/// Extracts the symmetric matrix A2 (A2[i][k], 0-based), the vector A1 and
/// the scalar A0 from a weight-free operator of spatial order <= 2, so that
/// the operator is  sum_i A2[i][i] d_i^2 + sum_{i<k} 2 A2[i][k] d_i d_k
///                  + A1[i] d_i + A0.
struct SecondOrderData {
    std::vector<std::vector<MultiPoly>> a2;
    std::vector<MultiPoly> a1;
    MultiPoly a0;
};

inline SecondOrderData split_second_order(const DensityOperator& delta) {
    const int d = delta.dim();
    SecondOrderData out;
    out.a2.assign(static_cast<size_t>(d), std::vector<MultiPoly>(static_cast<size_t>(d), MultiPoly(d)));
    out.a1.assign(static_cast<size_t>(d), MultiPoly(d));
    out.a0 = MultiPoly(d);
    for (const auto& [k, c] : delta.terms()) {
        const unsigned deg = expo_degree(k.alpha);
        if (deg == 0) {
            out.a0 += c;
        } else if (deg == 1) {
            for (size_t i = 0; i < k.alpha.size(); ++i)
                if (k.alpha[i] == 1) out.a1[i] += c;
        } else {
            // deg == 2: either 2 e_i (diagonal) or e_i + e_k (off-diagonal).
            int first = -1, second = -1;
            for (size_t i = 0; i < k.alpha.size(); ++i) {
                if (k.alpha[i] == 2) first = second = static_cast<int>(i);
                else if (k.alpha[i] == 1) (first < 0 ? first : second) = static_cast<int>(i);
            }
            if (first == second) {
                out.a2[static_cast<size_t>(first)][static_cast<size_t>(first)] += c;
            } else {
                MultiPoly half = c * Rational(1, 2);
                out.a2[static_cast<size_t>(first)][static_cast<size_t>(second)] += half;
                out.a2[static_cast<size_t>(second)][static_cast<size_t>(first)] += half;
            }
        }
    }
    return out;
}

/// Rebuilds the weight-free operator from split second-order data.
inline DensityOperator assemble_second_order(int d, const SecondOrderData& s) {
    DensityOperator out(d);
    for (int i = 0; i < d; ++i)
        for (int k = i; k < d; ++k) {
            Expo alpha(static_cast<size_t>(d), 0);
            alpha[static_cast<size_t>(i)] += 1;
            alpha[static_cast<size_t>(k)] += 1;
            MultiPoly c = s.a2[static_cast<size_t>(i)][static_cast<size_t>(k)];
            if (i != k) c = c * Rational(2);
            out.add_term(alpha, 0, c);
        }
    for (int i = 0; i < d; ++i) {
        Expo alpha(static_cast<size_t>(d), 0);
        alpha[static_cast<size_t>(i)] = 1;
        out.add_term(alpha, 0, s.a1[static_cast<size_t>(i)]);
    }
    out.add_term(Expo(static_cast<size_t>(d), 0), 0, s.a0);
    return out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// First-order pencils
// ---------------------------------------------------------------------------

/// The [p:q] pencil through a first-order operator L = X^i d_i + F acting on
/// weight-lam densities:
///   Pi(L) = L_X + (p w + q)/(p lam + q) * S,   S = F - lam d_i X^i.
/// Defined away from the line p lam + q = 0; proportional (p, q) give the
/// same lifting.
inline DensityOperator first_order_pencil(const DensityOperator& l, const Rational& lam,
                                          const Rational& p, const Rational& q) {
    detail::require_weight_free(l, "first_order_pencil");
    detail::require_order_at_most(l, 1, "first_order_pencil");
    if (p == 0 && q == 0)
        throw Error(ErrorCode::ExcludedParam, "first_order_pencil: (p, q) = (0, 0) is not a pencil");
    const Rational denom = p * lam + q;
    if (denom == 0)
        throw Error(ErrorCode::SingularWeight,
                    "first_order_pencil: weight lies on the excluded line p*lam + q = 0 (lam = " +
                        rational_to_string(lam) + ", [p:q] = [" + rational_to_string(p) + ":" +
                        rational_to_string(q) + "])");

    const int d = l.dim();
    std::vector<MultiPoly> comp;
    comp.reserve(static_cast<size_t>(d));
    for (int i = 1; i <= d; ++i) {
        Expo e(static_cast<size_t>(d), 0);
        e[static_cast<size_t>(i - 1)] = 1;
        comp.push_back(l.coefficient(e, 0));
    }
    VectorField x(d, std::move(comp));
    MultiPoly f = l.coefficient(Expo(static_cast<size_t>(d), 0), 0);
    MultiPoly s = f - lam * divergence(x);

    LambdaPoly factor(std::vector<Rational>{q / denom, p / denom}); // (q + p w)/(p lam + q)
    return lie_lift(x) + mul_wpoly(factor, DensityOperator::from_poly(s));
}

// ---------------------------------------------------------------------------
// Canonical second-order lift
// ---------------------------------------------------------------------------

/// Principal data of a self-adjoint second-order operator on densities:
/// symmetric matrix S, vector B, scalar C.
struct PrincipalSymbolHat {
    int dim = 0;
    std::vector<std::vector<MultiPoly>> s; // symmetric d x d
    std::vector<MultiPoly> b;
    MultiPoly c;

    PrincipalSymbolHat(int d, std::vector<std::vector<MultiPoly>> smat,
                       std::vector<MultiPoly> bvec, MultiPoly cscal)
        : dim(d), s(std::move(smat)), b(std::move(bvec)), c(std::move(cscal)) {
        if (s.size() != static_cast<size_t>(dim))
            throw Error(ErrorCode::Dim, "principal data: matrix must be d x d");
        for (const auto& row : s) {
            if (row.size() != static_cast<size_t>(dim))
                throw Error(ErrorCode::Dim, "principal data: matrix must be d x d");
            for (const auto& e : row)
                if (e.dim() != dim) throw Error(ErrorCode::Dim, "principal data: entry dimension mismatch");
        }
        for (size_t i = 0; i < s.size(); ++i)
            for (size_t k = i + 1; k < s.size(); ++k)
                if (!(s[i][k] == s[k][i]))
                    throw Error(ErrorCode::ExcludedParam, "principal data: matrix must be symmetric");
        if (b.size() != static_cast<size_t>(dim))
            throw Error(ErrorCode::Dim, "principal data: vector must have d components");
        for (const auto& e : b)
            if (e.dim() != dim) throw Error(ErrorCode::Dim, "principal data: entry dimension mismatch");
        if (c.dim() != dim) throw Error(ErrorCode::Dim, "principal data: scalar dimension mismatch");
    }
};

/// The unique self-adjoint operator with leading data (S, B, C) that kills
/// constants:
///   D = S^{ik} d_i d_k + (d_k S^{ki}) d_i + (2w - 1) B^i d_i + w (d_k B^k)
///       + w (w - 1) C.
inline DensityOperator operator_from_symbol(const PrincipalSymbolHat& sym) {
    const int d = sym.dim;
    DensityOperator out(d);
    MultiPoly div_b(d);

    for (int i = 0; i < d; ++i) {
        // Second-order terms S^{ik} d_i d_k (matrix symmetric: i<=k with weight 2 off-diagonal).
        for (int k = i; k < d; ++k) {
            Expo alpha(static_cast<size_t>(d), 0);
            alpha[static_cast<size_t>(i)] += 1;
            alpha[static_cast<size_t>(k)] += 1;
            MultiPoly c = sym.s[static_cast<size_t>(i)][static_cast<size_t>(k)];
            if (i != k) c = c * Rational(2);
            out.add_term(alpha, 0, c);
        }
        Expo ei(static_cast<size_t>(d), 0);
        ei[static_cast<size_t>(i)] = 1;
        // (d_k S^{ki}) d_i
        MultiPoly div_s(d);
        for (int k = 0; k < d; ++k)
            div_s += sym.s[static_cast<size_t>(k)][static_cast<size_t>(i)].partial(k + 1);
        out.add_term(ei, 0, div_s);
        // (2w - 1) B^i d_i
        out.add_term(ei, 0, -sym.b[static_cast<size_t>(i)]);
        out.add_term(ei, 1, Rational(2) * sym.b[static_cast<size_t>(i)]);
        div_b += sym.b[static_cast<size_t>(i)].partial(i + 1);
    }
    Expo z(static_cast<size_t>(d), 0);
    // w (d_k B^k)
    out.add_term(z, 1, div_b);
    // w (w - 1) C
    out.add_term(z, 2, sym.c);
    out.add_term(z, 1, -sym.c);
    return out;
}

/// Covariant-derivative data on densities: the covector gamma_i with
/// nabla_i |Dx| = gamma_i |Dx|. No flatness is assumed or checked here.
struct Connection {
    int dim = 0;
    std::vector<MultiPoly> gamma;

    Connection(int d, std::vector<MultiPoly> g) : dim(d), gamma(std::move(g)) {
        if (gamma.size() != static_cast<size_t>(dim))
            throw Error(ErrorCode::Dim, "connection needs one gamma component per dimension");
        for (const auto& c : gamma)
            if (c.dim() != dim) throw Error(ErrorCode::Dim, "gamma component dimension mismatch");
    }
};

/// Horizontal second-order lift attached to a connection: the principal
/// data (S, Gamma^i, Gamma^i Gamma_i) with Gamma^i = S^{ik} Gamma_k.
inline DensityOperator operator_from_symbol_connection(const std::vector<std::vector<MultiPoly>>& s,
                                                       const Connection& conn) {
    const int dim = conn.dim;
    // Validates the shape and symmetry of s before indexing into it.
    PrincipalSymbolHat sym(dim, s, std::vector<MultiPoly>(static_cast<size_t>(dim), MultiPoly(dim)),
                           MultiPoly(dim));
    for (int i = 0; i < dim; ++i) {
        MultiPoly acc(dim);
        for (int k = 0; k < dim; ++k)
            acc += s[static_cast<size_t>(i)][static_cast<size_t>(k)] * conn.gamma[static_cast<size_t>(k)];
        sym.c += acc * conn.gamma[static_cast<size_t>(i)];
        sym.b[static_cast<size_t>(i)] = std::move(acc);
    }
    return operator_from_symbol(sym);
}

/// Canonical lift of a weight-free operator of order <= 2 acting on
/// weight-lam densities: the unique pencil member that is self-adjoint,
/// kills constants, and restricts back to the input at weight lam.
/// Singular at lam in {0, 1/2, 1}.
inline DensityOperator canonical_second_order_lift(const DensityOperator& delta,
                                                   const Rational& lam) {
    detail::require_weight_free(delta, "canonical_second_order_lift");
    detail::require_order_at_most(delta, 2, "canonical_second_order_lift");
    if (lam == 0 || lam == Rational(1, 2) || lam == 1)
        throw Error(ErrorCode::SingularWeight,
                    "canonical_second_order_lift: weight " + rational_to_string(lam) +
                        " lies in the excluded set {0, 1/2, 1}");

    const int d = delta.dim();
    detail::SecondOrderData a = detail::split_second_order(delta);

    // B^i = (A1^i - d_k A2^{ki}) / (2 lam - 1)
    const Rational inv_2l1 = Rational(1) / (Rational(2) * lam - 1);
    std::vector<MultiPoly> bvec(static_cast<size_t>(d), MultiPoly(d));
    MultiPoly div_a1(d), div2_a2(d);
    for (int i = 0; i < d; ++i) {
        MultiPoly div_col(d);
        for (int k = 0; k < d; ++k)
            div_col += a.a2[static_cast<size_t>(k)][static_cast<size_t>(i)].partial(k + 1);
        bvec[static_cast<size_t>(i)] = (a.a1[static_cast<size_t>(i)] - div_col) * inv_2l1;
        div_a1 += a.a1[static_cast<size_t>(i)].partial(i + 1);
        div2_a2 += div_col.partial(i + 1);
    }

    // C = A0 / (lam (lam-1)) - (d_k A1^k - d_i d_k A2^{ki}) / ((lam-1)(2 lam-1))
    MultiPoly cscal = a.a0 * (Rational(1) / (lam * (lam - 1))) -
                      (div_a1 - div2_a2) * (Rational(1) / ((lam - 1) * (Rational(2) * lam - 1)));

    return operator_from_symbol(PrincipalSymbolHat(d, a.a2, std::move(bvec), std::move(cscal)));
}

/// Conjugation isomorphism between second-order operators on weight-lam and
/// weight-mu densities, computed both from the closed form and by
/// restricting the canonical lift; the two must agree.
inline DensityOperator duval_ovsienko_iso(const DensityOperator& delta, const Rational& lam,
                                          const Rational& mu) {
    detail::require_weight_free(delta, "duval_ovsienko_iso");
    detail::require_order_at_most(delta, 2, "duval_ovsienko_iso");
    for (const Rational& w : {lam, mu})
        if (w == 0 || w == Rational(1, 2) || w == 1)
            throw Error(ErrorCode::SingularWeight,
                        "duval_ovsienko_iso: weight " + rational_to_string(w) +
                            " lies in the excluded set {0, 1/2, 1}");

    const int d = delta.dim();
    detail::SecondOrderData a = detail::split_second_order(delta);
    detail::SecondOrderData b;
    b.a2 = a.a2;
    b.a1.assign(static_cast<size_t>(d), MultiPoly(d));
    b.a0 = MultiPoly(d);

    const Rational two_l1 = Rational(2) * lam - 1;
    const Rational c_keep = (Rational(2) * mu - 1) / two_l1;
    const Rational c_div = Rational(2) * (lam - mu) / two_l1;
    MultiPoly div_a1(d), div2_a2(d);
    for (int i = 0; i < d; ++i) {
        MultiPoly div_col(d);
        for (int j = 0; j < d; ++j)
            div_col += a.a2[static_cast<size_t>(j)][static_cast<size_t>(i)].partial(j + 1);
        b.a1[static_cast<size_t>(i)] =
            c_keep * a.a1[static_cast<size_t>(i)] + c_div * div_col;
        div_a1 += a.a1[static_cast<size_t>(i)].partial(i + 1);
        div2_a2 += div_col.partial(i + 1);
    }
    const Rational c0_keep = mu * (mu - 1) / (lam * (lam - 1));
    const Rational c0_div = mu * (lam - mu) / (two_l1 * (lam - 1));
    b.a0 = c0_keep * a.a0 + c0_div * (div_a1 - div2_a2);

    DensityOperator closed = detail::assemble_second_order(d, b);
    DensityOperator via_lift = restrict_weight(canonical_second_order_lift(delta, lam), mu);
    if (!(closed == via_lift))
        throw std::logic_error("duval_ovsienko_iso: closed form disagrees with restricted lift");
    return closed;
}

} // namespace densops
