#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "densops/error.hpp"
#include "densops/lambdapoly.hpp"
#include "densops/multipoly.hpp"
#include "densops/rational.hpp"

namespace densops {

namespace detail {

/// Iterates gamma over all multi-indices with gamma <= alpha componentwise.
/// Calls f(gamma) for each; starts at 0.
template <typename F>
void for_each_subindex(const Expo& alpha, F&& f) {
    Expo gamma(alpha.size(), 0);
    for (;;) {
        f(gamma);
        size_t i = 0;
        while (i < alpha.size()) {
            if (gamma[i] < alpha[i]) {
                ++gamma[i];
                break;
            }
            gamma[i] = 0;
            ++i;
        }
        if (i == alpha.size()) return;
    }
}

/// Product of componentwise binomials C(alpha_i, gamma_i).
inline Rational multi_binomial(const Expo& alpha, const Expo& gamma) {
    Rational r(1);
    for (size_t i = 0; i < alpha.size(); ++i) r *= rat_binomial(alpha[i], gamma[i]);
    return r;
}

} // namespace detail

/// Key of a normal-ordered term: derivative multi-index and power of the
/// central weight operator. Terms print with higher derivative order first,
/// ties resolved lexicographically (x1-direction most significant), then by
/// ascending weight power.
struct TermKey {
    Expo alpha;
    unsigned wpow = 0;

    friend bool operator==(const TermKey& a, const TermKey& b) {
        return a.alpha == b.alpha && a.wpow == b.wpow;
    }
};

struct TermKeyOrder {
    bool operator()(const TermKey& a, const TermKey& b) const {
        GradedLexDesc lt;
        if (lt(a.alpha, b.alpha)) return true;
        if (lt(b.alpha, a.alpha)) return false;
        return a.wpow < b.wpow;
    }
};

/// A differential operator on the algebra of densities over R^d with
/// polynomial coefficients: a finite sum of normal-ordered terms
/// c(x) * D^alpha * w^k, where D^alpha is a spatial derivative monomial and
/// w is the central weight operator (acting as multiplication by the weight
/// on each homogeneous component). Addition, composition, and the formal
/// adjoint are all exact.
class DensityOperator {
public:
    using TermMap = std::map<TermKey, MultiPoly, TermKeyOrder>;

    explicit DensityOperator(int dim = 0) : dim_(dim) {
        if (dim < 0) throw Error(ErrorCode::Dim, "negative dimension");
    }

    static DensityOperator zero(int dim) { return DensityOperator(dim); }

    /// Multiplication operator by a polynomial.
    static DensityOperator from_poly(const MultiPoly& f) {
        DensityOperator a(f.dim());
        a.add_term(Expo(static_cast<size_t>(f.dim()), 0), 0, f);
        return a;
    }

    static DensityOperator constant(int dim, const Rational& c) {
        return from_poly(MultiPoly::constant(dim, c));
    }

    /// d/dx_i, i in 1..dim.
    static DensityOperator partial_op(int dim, int i) {
        DensityOperator a(dim);
        if (i < 1 || i > dim)
            throw Error(ErrorCode::Dim, "derivative index " + std::to_string(i) +
                                            " outside 1.." + std::to_string(dim));
        Expo alpha(static_cast<size_t>(dim), 0);
        alpha[static_cast<size_t>(i - 1)] = 1;
        a.add_term(alpha, 0, MultiPoly::constant(dim, Rational(1)));
        return a;
    }

    /// The central weight operator.
    static DensityOperator weight_op(int dim) {
        DensityOperator a(dim);
        a.add_term(Expo(static_cast<size_t>(dim), 0), 1, MultiPoly::constant(dim, Rational(1)));
        return a;
    }

    static DensityOperator term(int dim, const Expo& alpha, unsigned wpow, const MultiPoly& c) {
        DensityOperator a(dim);
        a.add_term(alpha, wpow, c);
        return a;
    }

    int dim() const { return dim_; }
    bool is_zero() const { return terms_.empty(); }
    const TermMap& terms() const { return terms_; }

    void add_term(const Expo& alpha, unsigned wpow, const MultiPoly& c) {
        if (alpha.size() != static_cast<size_t>(dim_))
            throw Error(ErrorCode::Dim, "derivative multi-index length mismatch");
        if (c.dim() != dim_) throw Error(ErrorCode::Dim, "coefficient dimension mismatch");
        if (c.is_zero()) return;
        TermKey k{alpha, wpow};
        auto [it, inserted] = terms_.emplace(std::move(k), c);
        if (!inserted) {
            it->second += c;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    MultiPoly coefficient(const Expo& alpha, unsigned wpow) const {
        auto it = terms_.find(TermKey{alpha, wpow});
        return it == terms_.end() ? MultiPoly(dim_) : it->second;
    }

    /// Highest spatial derivative order |alpha|; -1 for the zero operator.
    int spatial_order() const {
        int best = -1;
        for (const auto& [k, c] : terms_)
            best = std::max(best, static_cast<int>(expo_degree(k.alpha)));
        return best;
    }

    /// Highest power of the weight operator; -1 for the zero operator.
    int weight_degree() const {
        int best = -1;
        for (const auto& [k, c] : terms_) best = std::max(best, static_cast<int>(k.wpow));
        return best;
    }

    bool is_weight_free() const {
        for (const auto& [k, c] : terms_)
            if (k.wpow != 0) return false;
        return true;
    }

    DensityOperator& operator+=(const DensityOperator& o) {
        check_dim(o);
        for (const auto& [k, c] : o.terms_) add_term(k.alpha, k.wpow, c);
        return *this;
    }
    DensityOperator& operator-=(const DensityOperator& o) {
        check_dim(o);
        for (const auto& [k, c] : o.terms_) add_term(k.alpha, k.wpow, -c);
        return *this;
    }
    DensityOperator& operator*=(const Rational& s) {
        if (s == 0) {
            terms_.clear();
            return *this;
        }
        for (auto& [k, c] : terms_) c *= s;
        return *this;
    }

    friend DensityOperator operator+(DensityOperator a, const DensityOperator& b) { return a += b; }
    friend DensityOperator operator-(DensityOperator a, const DensityOperator& b) { return a -= b; }
    friend DensityOperator operator-(const DensityOperator& a) {
        DensityOperator r = a;
        for (auto& [k, c] : r.terms_) c = -c;
        return r;
    }
    friend DensityOperator operator*(const DensityOperator& a, const Rational& s) {
        DensityOperator r = a;
        r *= s;
        return r;
    }
    friend DensityOperator operator*(const Rational& s, const DensityOperator& a) { return a * s; }

    friend bool operator==(const DensityOperator& a, const DensityOperator& b) {
        return a.dim_ == b.dim_ && a.terms_ == b.terms_;
    }
    friend bool operator!=(const DensityOperator& a, const DensityOperator& b) { return !(a == b); }

private:
    void check_dim(const DensityOperator& o) const {
        if (dim_ != o.dim_)
            throw Error(ErrorCode::Dim, "operator dimensions differ (" + std::to_string(dim_) +
                                            " vs " + std::to_string(o.dim_) + ")");
    }

    int dim_;
    TermMap terms_;
};

namespace detail {

inline void require_weight_free(const DensityOperator& a, const char* who) {
    if (!a.is_weight_free())
        throw Error(ErrorCode::Order, std::string(who) + ": expected a weight-free operator");
}

inline void require_order_at_most(const DensityOperator& a, int n, const char* who) {
    if (a.spatial_order() > n)
        throw Error(ErrorCode::Order, std::string(who) + ": operator order " +
                                          std::to_string(a.spatial_order()) + " exceeds " +
                                          std::to_string(n));
}

} // namespace detail

/// Composition a after b, re-expressed in normal order. For single terms,
///   (f D^a w^j) (g D^b w^l)
///     = f * sum_{g<=a} C(a,g) (D^{a-g} g) D^{g+b} w^{j+l},
/// the iterated Leibniz rule; the weight operator is central.
inline DensityOperator compose(const DensityOperator& a, const DensityOperator& b) {
    if (a.dim() != b.dim()) throw Error(ErrorCode::Dim, "compose: operator dimensions differ");
    DensityOperator out(a.dim());
    for (const auto& [ka, fa] : a.terms()) {
        for (const auto& [kb, fb] : b.terms()) {
            detail::for_each_subindex(ka.alpha, [&](const Expo& gamma) {
                Expo rest = ka.alpha;
                for (size_t i = 0; i < rest.size(); ++i) rest[i] -= gamma[i];
                MultiPoly dfb = fb.partial_multi(rest);
                if (dfb.is_zero()) return;
                Rational coeff = detail::multi_binomial(ka.alpha, gamma);
                Expo alpha = gamma;
                for (size_t i = 0; i < alpha.size(); ++i) alpha[i] += kb.alpha[i];
                out.add_term(alpha, ka.wpow + kb.wpow, (fa * dfb) * coeff);
            });
        }
    }
    return out;
}

/// Left multiplication by a polynomial (composition with a multiplication
/// operator on the left, which needs no Leibniz expansion).
inline DensityOperator mul_poly(const MultiPoly& f, const DensityOperator& a) {
    if (f.dim() != a.dim()) throw Error(ErrorCode::Dim, "mul_poly: dimension mismatch");
    DensityOperator out(a.dim());
    for (const auto& [k, c] : a.terms()) out.add_term(k.alpha, k.wpow, f * c);
    return out;
}

/// Left multiplication by a polynomial in the (central) weight operator.
inline DensityOperator mul_wpoly(const LambdaPoly& p, const DensityOperator& a) {
    DensityOperator out(a.dim());
    for (unsigned j = 0; j <= static_cast<unsigned>(std::max(0, p.degree())); ++j) {
        if (p.coeff(j) == 0) continue;
        for (const auto& [k, c] : a.terms()) out.add_term(k.alpha, k.wpow + j, c * p.coeff(j));
    }
    return out;
}

/// Formal adjoint with respect to the canonical pairing of weight-mu with
/// weight-(1-mu) densities: an anti-automorphism fixing functions, with
///   (d/dx_i)* = -d/dx_i   and   w* = 1 - w.
/// On a normal-ordered term this is (1-w)^k (-D)^alpha f, re-normal-ordered:
///   (f D^alpha w^k)* = (-1)^{|alpha|} sum_{g<=alpha} C(alpha,g) (D^{alpha-g} f) D^g
///                      * sum_{j<=k} C(k,j) (-1)^j w^j.
inline DensityOperator adjoint(const DensityOperator& a) {
    DensityOperator out(a.dim());
    for (const auto& [k, f] : a.terms()) {
        Rational sign_alpha = (expo_degree(k.alpha) % 2 == 0) ? Rational(1) : Rational(-1);
        detail::for_each_subindex(k.alpha, [&](const Expo& gamma) {
            Expo rest = k.alpha;
            for (size_t i = 0; i < rest.size(); ++i) rest[i] -= gamma[i];
            MultiPoly df = f.partial_multi(rest);
            if (df.is_zero()) return;
            Rational cg = sign_alpha * detail::multi_binomial(k.alpha, gamma);
            for (unsigned j = 0; j <= k.wpow; ++j) {
                Rational cj = rat_binomial(k.wpow, j) * ((j % 2 == 0) ? Rational(1) : Rational(-1));
                out.add_term(gamma, j, df * (cg * cj));
            }
        });
    }
    return out;
}

/// Substitutes the weight operator by the number lam, yielding the operator's
/// action on densities of one fixed weight.
inline DensityOperator restrict_weight(const DensityOperator& a, const Rational& lam) {
    DensityOperator out(a.dim());
    for (const auto& [k, c] : a.terms()) out.add_term(k.alpha, 0, c * rat_pow(lam, k.wpow));
    return out;
}

// ---------------------------------------------------------------------------
// Vector fields and their lifts
// ---------------------------------------------------------------------------

/// Polynomial vector field X = X^i d/dx_i on R^d.
struct VectorField {
    int dim = 0;
    std::vector<MultiPoly> comp; // comp[i-1] = X^i

    VectorField() = default;
    VectorField(int d, std::vector<MultiPoly> components) : dim(d), comp(std::move(components)) {
        if (comp.size() != static_cast<size_t>(dim))
            throw Error(ErrorCode::Dim, "vector field needs one component per dimension");
        for (const auto& c : comp)
            if (c.dim() != dim) throw Error(ErrorCode::Dim, "vector field component dimension mismatch");
    }

    friend bool operator==(const VectorField& a, const VectorField& b) {
        return a.dim == b.dim && a.comp == b.comp;
    }
};

/// Coordinate divergence of a vector field.
inline MultiPoly divergence(const VectorField& x) {
    MultiPoly r(x.dim);
    for (int i = 1; i <= x.dim; ++i) r += x.comp[static_cast<size_t>(i - 1)].partial(i);
    return r;
}

/// Lie bracket [X, Y]^i = X^j d_j Y^i - Y^j d_j X^i.
inline VectorField bracket(const VectorField& x, const VectorField& y) {
    if (x.dim != y.dim) throw Error(ErrorCode::Dim, "bracket: dimension mismatch");
    std::vector<MultiPoly> comp;
    comp.reserve(static_cast<size_t>(x.dim));
    for (int i = 0; i < x.dim; ++i) {
        MultiPoly acc(x.dim);
        for (int j = 1; j <= x.dim; ++j) {
            acc += x.comp[static_cast<size_t>(j - 1)] * y.comp[static_cast<size_t>(i)].partial(j);
            acc -= y.comp[static_cast<size_t>(j - 1)] * x.comp[static_cast<size_t>(i)].partial(j);
        }
        comp.push_back(acc);
    }
    return VectorField(x.dim, std::move(comp));
}

/// A weight-0 first-order operator X^i d_i + X0 w, viewed as a vector field
/// on the total space of the algebra of densities.
struct HatVectorField {
    VectorField base;
    MultiPoly vertical; // X0

    HatVectorField(VectorField b, MultiPoly v) : base(std::move(b)), vertical(std::move(v)) {
        if (vertical.dim() != base.dim)
            throw Error(ErrorCode::Dim, "vertical component dimension mismatch");
    }

    DensityOperator as_operator() const {
        DensityOperator a(base.dim);
        for (int i = 1; i <= base.dim; ++i) {
            Expo alpha(static_cast<size_t>(base.dim), 0);
            alpha[static_cast<size_t>(i - 1)] = 1;
            a.add_term(alpha, 0, base.comp[static_cast<size_t>(i - 1)]);
        }
        a.add_term(Expo(static_cast<size_t>(base.dim), 0), 1, vertical);
        return a;
    }
};

/// Divergence of the lifted field X^i d_i + X0 w with respect to the
/// canonical bilinear structure: the unique scalar with
/// div(Xhat) = -(Xhat + Xhat*). Concretely d_i X^i - X0.
inline DensityOperator divergence_hat(const HatVectorField& xh) {
    return DensityOperator::from_poly(divergence(xh.base) - xh.vertical);
}

/// Lie derivative of densities along X, acting on every weight at once:
/// L_X = X^i d_i + (d_i X^i) w.
inline DensityOperator lie_lift(const VectorField& x) {
    return HatVectorField(x, divergence(x)).as_operator();
}

/// Commutator with the lifted Lie derivative: ad_K(a) = [L_K, a].
inline DensityOperator ad_action(const VectorField& k, const DensityOperator& a) {
    DensityOperator l = lie_lift(k);
    return compose(l, a) - compose(a, l);
}

/// Same commutator after restriction to a single weight lam; for
/// weight-free operators this equals restrict_weight(ad_action(k, a), lam).
inline DensityOperator ad_at_weight(const VectorField& k, const DensityOperator& a,
                                    const Rational& lam) {
    DensityOperator l = restrict_weight(lie_lift(k), lam);
    return compose(l, a) - compose(a, l);
}

// ---------------------------------------------------------------------------
// Quasi-densities (finite sums of single-weight polynomial densities)
// ---------------------------------------------------------------------------

/// A finite formal sum  sum_mu  s_mu(x) |Dx|^mu  with polynomial components.
class QuasiDensity {
public:
    explicit QuasiDensity(int dim = 0) : dim_(dim) {
        if (dim < 0) throw Error(ErrorCode::Dim, "negative dimension");
    }

    static QuasiDensity unit(int dim) {
        QuasiDensity q(dim);
        q.add_part(Rational(0), MultiPoly::constant(dim, Rational(1)));
        return q;
    }

    static QuasiDensity single(const Rational& weight, const MultiPoly& s) {
        QuasiDensity q(s.dim());
        q.add_part(weight, s);
        return q;
    }

    int dim() const { return dim_; }
    bool is_zero() const { return parts_.empty(); }
    const std::map<Rational, MultiPoly>& parts() const { return parts_; }

    MultiPoly part(const Rational& weight) const {
        auto it = parts_.find(weight);
        return it == parts_.end() ? MultiPoly(dim_) : it->second;
    }

    void add_part(const Rational& weight, const MultiPoly& s) {
        if (s.dim() != dim_) throw Error(ErrorCode::Dim, "density component dimension mismatch");
        if (s.is_zero()) return;
        auto [it, inserted] = parts_.emplace(weight, s);
        if (!inserted) {
            it->second += s;
            if (it->second.is_zero()) parts_.erase(it);
        }
    }

    QuasiDensity& operator+=(const QuasiDensity& o) {
        check_dim(o);
        for (const auto& [w, s] : o.parts_) add_part(w, s);
        return *this;
    }
    QuasiDensity& operator-=(const QuasiDensity& o) {
        check_dim(o);
        for (const auto& [w, s] : o.parts_) add_part(w, -s);
        return *this;
    }
    friend QuasiDensity operator+(QuasiDensity a, const QuasiDensity& b) { return a += b; }
    friend QuasiDensity operator-(QuasiDensity a, const QuasiDensity& b) { return a -= b; }

    /// Product of quasi-densities: weights add, components multiply.
    friend QuasiDensity operator*(const QuasiDensity& a, const QuasiDensity& b) {
        a.check_dim(b);
        QuasiDensity r(a.dim_);
        for (const auto& [wa, sa] : a.parts_)
            for (const auto& [wb, sb] : b.parts_) r.add_part(wa + wb, sa * sb);
        return r;
    }

    friend QuasiDensity operator*(const QuasiDensity& a, const Rational& s) {
        QuasiDensity r(a.dim_);
        for (const auto& [w, p] : a.parts_) r.add_part(w, p * s);
        return r;
    }

    friend bool operator==(const QuasiDensity& a, const QuasiDensity& b) {
        return a.dim_ == b.dim_ && a.parts_ == b.parts_;
    }
    friend bool operator!=(const QuasiDensity& a, const QuasiDensity& b) { return !(a == b); }

private:
    void check_dim(const QuasiDensity& o) const {
        if (dim_ != o.dim_) throw Error(ErrorCode::Dim, "quasi-density dimensions differ");
    }

    int dim_;
    std::map<Rational, MultiPoly> parts_; // weight -> component
};

/// Applies an operator to a quasi-density; the weight operator acts on the
/// weight-mu part as multiplication by mu.
inline QuasiDensity apply(const DensityOperator& a, const QuasiDensity& q) {
    if (a.dim() != q.dim()) throw Error(ErrorCode::Dim, "apply: dimension mismatch");
    QuasiDensity out(q.dim());
    for (const auto& [w, s] : q.parts()) {
        for (const auto& [k, c] : a.terms()) {
            MultiPoly ds = s.partial_multi(k.alpha);
            if (ds.is_zero()) continue;
            out.add_part(w, c * ds * rat_pow(w, k.wpow));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Order filtrations and first-order structure
// ---------------------------------------------------------------------------

/// Minimum spatial derivative order over the operator's terms: the operator
/// lowers polynomial degree by at least this much on every component. The
/// zero operator is vertical of every order (nullopt).
inline std::optional<int> vertical_order(const DensityOperator& a) {
    if (a.is_zero()) return std::nullopt;
    int best = -1;
    for (const auto& [k, c] : a.terms()) {
        int o = static_cast<int>(expo_degree(k.alpha));
        if (best < 0 || o < best) best = o;
    }
    return best;
}

/// Drops every term of spatial derivative order <= k (the part that lowers
/// order by more than the complement); k = -1 keeps everything.
inline DensityOperator truncate_mod_vertical(const DensityOperator& a, int k) {
    if (k < -1) throw Error(ErrorCode::Order, "truncation order must be >= -1");
    DensityOperator out(a.dim());
    for (const auto& [key, c] : a.terms())
        if (static_cast<int>(expo_degree(key.alpha)) > k) out.add_term(key.alpha, key.wpow, c);
    return out;
}

struct FirstOrderParts {
    VectorField x;  ///< the base vector field
    MultiPoly s1;   ///< coefficient of w beyond the Lie lift
    MultiPoly s2;   ///< scalar (order-zero, weight-free) part
};

/// Writes a first-order operator uniquely as L_X + s1 w + s2.
inline FirstOrderParts decompose_first_order(const DensityOperator& a) {
    if (a.spatial_order() > 1 || a.weight_degree() > 1)
        throw Error(ErrorCode::Order, "first-order decomposition needs an operator of order <= 1");
    const int d = a.dim();
    for (const auto& [k, c] : a.terms())
        if (expo_degree(k.alpha) == 1 && k.wpow == 1)
            throw Error(ErrorCode::Order,
                        "first-order decomposition needs an operator of order <= 1");
    std::vector<MultiPoly> comp;
    comp.reserve(static_cast<size_t>(d));
    for (int i = 1; i <= d; ++i) {
        Expo e(static_cast<size_t>(d), 0);
        e[static_cast<size_t>(i - 1)] = 1;
        comp.push_back(a.coefficient(e, 0));
    }
    VectorField x(d, std::move(comp));
    Expo z(static_cast<size_t>(d), 0);
    MultiPoly s1 = a.coefficient(z, 1) - divergence(x);
    MultiPoly s2 = a.coefficient(z, 0);
    return FirstOrderParts{std::move(x), std::move(s1), std::move(s2)};
}

/// Polarized symbol of a normalized operator: a(fg) - f a(g) - g a(f) for
/// weight-0 polynomial densities f, g. Requires a(1) = 0.
inline MultiPoly long_bracket(const DensityOperator& a, const MultiPoly& f, const MultiPoly& g) {
    if (f.dim() != a.dim() || g.dim() != a.dim())
        throw Error(ErrorCode::Dim, "long_bracket: dimension mismatch");
    QuasiDensity unit = QuasiDensity::unit(a.dim());
    QuasiDensity a1 = apply(a, unit);
    if (!a1.is_zero())
        throw Error(ErrorCode::ExcludedParam,
                    "long_bracket requires apply(a, 1) = 0, but apply(a, 1) = " +
                        a1.part(Rational(0)).str());
    auto val = [&](const MultiPoly& p) {
        return apply(a, QuasiDensity::single(Rational(0), p)).part(Rational(0));
    };
    return val(f * g) - f * val(g) - g * val(f);
}

} // namespace densops
