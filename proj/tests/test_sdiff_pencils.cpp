#include "support.hpp"

#include <functional>

using namespace densops;
using namespace densops::testing;

namespace {

VolumeStructure trivial_volume(int d) {
    std::vector<MultiPoly> gamma;
    for (int i = 0; i < d; ++i) gamma.emplace_back(d);
    return VolumeStructure(d, std::move(gamma));
}

SdiffFamilyParams family(int n, Rational lam, Rational b, std::vector<Rational> c,
                         std::vector<Rational> d) {
    SdiffFamilyParams p;
    p.n = n;
    p.lam = std::move(lam);
    p.b = std::move(b);
    p.c = std::move(c);
    p.d = std::move(d);
    return p;
}

/// All multi-indices of the given total degree in d variables.
std::vector<Expo> indices_of_degree(int d, unsigned deg) {
    std::vector<Expo> out;
    Expo cur(static_cast<size_t>(d), 0);
    std::function<void(size_t, unsigned)> rec = [&](size_t i, unsigned left) {
        if (i + 1 == cur.size()) {
            cur[i] = left;
            out.push_back(cur);
            return;
        }
        for (unsigned e = 0; e <= left; ++e) {
            cur[i] = e;
            rec(i + 1, left - e);
        }
    };
    rec(0, deg);
    return out;
}

Rational multinomial_count(const Expo& a) {
    auto fact = [](unsigned n) {
        unsigned long long f = 1;
        for (unsigned i = 2; i <= n; ++i) f *= i;
        return f;
    };
    unsigned long long f = fact(expo_degree(a));
    for (unsigned e : a) f /= fact(e);
    return Rational(f);
}

/// The closed form for the two highest spatial orders of the distinguished
/// lift of S^{ikmr} d_i d_k d_m d_r + L^{ikm} d_i d_k d_m:
///   S d^4 + ((lam - w)/(2 lam - 1) 4 d_r S^{rikm}
///            + (2 w - 1)/(2 lam - 1) L^{ikm}) d^3.
DensityOperator fourth_order_top_two(const DensityOperator& delta, const Rational& lam) {
    const int d = delta.dim();
    const Rational inv = Rational(1) / (2 * lam - 1);
    DensityOperator out(d);
    for (const auto& [k, c] : delta.terms())
        if (expo_degree(k.alpha) == 4) out.add_term(k.alpha, 0, c);
    for (const Expo& beta : indices_of_degree(d, 3)) {
        // Symmetric-tensor entries: c_alpha = (|alpha|!/alpha!) S^{sorted(alpha)}.
        MultiPoly div_s(d);
        for (int r = 0; r < d; ++r) {
            Expo a = beta;
            a[static_cast<size_t>(r)] += 1;
            div_s += (delta.coefficient(a, 0) * (Rational(1) / multinomial_count(a)))
                         .partial(r + 1);
        }
        MultiPoly base = div_s * (Rational(4) * inv) * multinomial_count(beta);
        out.add_term(beta, 0, base * lam);
        out.add_term(beta, 1, -base);
        MultiPoly l_beta = delta.coefficient(beta, 0);
        out.add_term(beta, 0, l_beta * (-inv));
        out.add_term(beta, 1, l_beta * (2 * inv));
    }
    return out;
}

} // namespace

TEST_CASE("volume lift with the trivial volume changes nothing") {
    RandomGen rng(401);
    for (int t = 0; t < 8; ++t) {
        int d = rng.uniform_int(1, 3);
        DensityOperator delta = rng.wfree_op(d, 3, 2);
        require_op_eq(volume_lift(delta, rng.rational(), trivial_volume(d)), delta);
    }
}

TEST_CASE("volume lift of low-order generators matches the expanded form") {
    // First order: d1 becomes d1 + (w - lam) gamma.
    MultiPoly g = poly("x1^2 + 1", 1);
    VolumeStructure vol(1, {g});
    Rational lam(3);
    DensityOperator lift1 = volume_lift(op("d1", 1), lam, vol);
    DensityOperator want1(1);
    want1.add_term({1}, 0, poly("1", 1));
    want1.add_term({0}, 1, g);
    want1.add_term({0}, 0, g * -lam);
    require_op_eq(lift1, want1);

    // Second order with constant gamma: d1^2 + 2 (w - lam) g d1 + (w - lam)^2 g^2.
    VolumeStructure cvol(1, {poly("3", 1)});
    require_op_eq(volume_lift(op("d1^2", 1), Rational(2), cvol),
                  op("d1^2 + 2*(w - 2)*3*d1 + (w - 2)*(w - 2)*9", 1));

    // Non-constant gamma picks up the derivative cross term
    //   d1^2 + 2 (w - lam) g d1 + (w - lam) g' + (w - lam)^2 g^2.
    DensityOperator lift2 = volume_lift(op("d1^2", 1), lam, vol);
    DensityOperator shift = op("w - 3", 1);
    DensityOperator want2 =
        op("d1^2", 1) +
        compose(compose(shift, DensityOperator::from_poly(g * Rational(2))), op("d1", 1)) +
        compose(shift, DensityOperator::from_poly(g.partial(1))) +
        compose(compose(shift, shift), DensityOperator::from_poly(g * g));
    require_op_eq(lift2, want2);

    // Multiplication operators are untouched.
    require_op_eq(volume_lift(op("x1^2 + x2", 2), Rational(1, 2), trivial_volume(2)),
                  op("x1^2 + x2", 2));
}

TEST_CASE("volume lift restricts to its input at the anchor weight") {
    RandomGen rng(402);
    for (int t = 0; t < 8; ++t) {
        int d = rng.uniform_int(1, 2);
        DensityOperator delta = rng.wfree_op(d, 3, 2);
        Rational lam = rng.rational();
        VolumeStructure vol = rng.flat_volume(d, 2);
        DensityOperator lifted = volume_lift(delta, lam, vol);
        require_op_eq(restrict_weight(lifted, lam), delta);
        CHECK(lifted.spatial_order() == delta.spatial_order());
    }
}

TEST_CASE("volume lift input validation") {
    VolumeStructure vol = trivial_volume(2);
    CHECK_THROWS_AS(volume_lift(op("d1", 1), Rational(0), vol), Error);
    try {
        volume_lift(op("w*d1", 2), Rational(0), vol);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Order);
    }
}

TEST_CASE("volume structure requires a closed connection form") {
    // gamma = (x2, 0) has d2 gamma_1 != d1 gamma_2.
    try {
        VolumeStructure bad(2, {poly("x2", 2), poly("0", 2)});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ExcludedParam);
    }
    // Gradients are fine, and the bare connection is handed through.
    VolumeStructure good(2, {poly("x2", 2), poly("x1", 2)});
    Connection conn = good.connection();
    CHECK(conn.dim == 2);
    CHECK(conn.gamma == good.gamma);
}

TEST_CASE("twisted adjoint on the documented examples") {
    VolumeStructure flat = trivial_volume(1);
    require_op_eq(rho_adjoint(op("d1", 1), flat), op("-d1", 1));

    MultiPoly g = poly("x1 + 2", 1);
    VolumeStructure vol(1, {g});
    DensityOperator want(1);
    want.add_term({1}, 0, poly("-1", 1));
    want.add_term({0}, 0, g);
    require_op_eq(rho_adjoint(op("d1", 1), vol), want);

    // Multiplication operators are fixed points.
    require_op_eq(rho_adjoint(op("x1^2 - 3", 1), vol), op("x1^2 - 3", 1));

    // Weight-bearing input is rejected.
    try {
        rho_adjoint(op("w", 1), vol);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Order);
    }
}

TEST_CASE("twisted adjoint is an involution and degenerates to the flat adjoint") {
    RandomGen rng(403);
    for (int t = 0; t < 8; ++t) {
        int d = rng.uniform_int(1, 2);
        DensityOperator delta = rng.wfree_op(d, 3, 2);
        VolumeStructure vol = rng.flat_volume(d, 2);
        require_op_eq(rho_adjoint(rho_adjoint(delta, vol), vol), delta);
        // With the trivial volume the twist reduces to the density-algebra
        // adjoint, which is weight-free on weight-free input.
        require_op_eq(rho_adjoint(delta, trivial_volume(d)), adjoint(delta));
    }
}

TEST_CASE("adjoint interchanges volume lifts at mirror weights") {
    RandomGen rng(404);
    for (int t = 0; t < 8; ++t) {
        int d = rng.uniform_int(1, 2);
        DensityOperator delta = rng.wfree_op(d, 3, 2);
        Rational lam = rng.rational();
        VolumeStructure vol = rng.flat_volume(d, 2);
        // The flat transpose of the input lifts to the adjoint of the lift.
        require_op_eq(adjoint(volume_lift(delta, lam, vol)),
                      volume_lift(adjoint(delta), Rational(1) - lam, vol));
        // The twisted adjoint is that same operator read at the weight pairing
        // with the anchor: restricting at -lam turns the conjugation by the
        // volume into the single twist by rho.
        require_op_eq(rho_adjoint(delta, vol),
                      restrict_weight(adjoint(volume_lift(delta, lam, vol)), -lam));
    }
}

TEST_CASE("the family at the origin of parameters is the volume lift") {
    RandomGen rng(405);
    for (int t = 0; t < 6; ++t) {
        int d = rng.uniform_int(1, 2);
        int n = rng.uniform_int(1, 3);
        DensityOperator delta = rng.wfree_op(d, n, 2);
        Rational lam = rng.rational();
        VolumeStructure vol = rng.flat_volume(d, 2);
        SdiffFamilyParams p = family(n, lam, Rational(0),
                                     std::vector<Rational>(static_cast<size_t>(n)),
                                     std::vector<Rational>(static_cast<size_t>(n)));
        require_op_eq(sdiff_family_lift(delta, p, vol), volume_lift(delta, lam, vol));
    }
}

TEST_CASE("first-order family in fully expanded form") {
    // For X^i d_i + F the family with parameters (b, c, d) is
    //   X^i d_i + (b - d)(w - lam) div X
    //   + (w - lam)(1 + b(2 lam - 1) - c lam + d(1 - lam)) X^i gamma_i
    //   + (1 + (c + d - 2 b)(w - lam)) F,
    // the -2b part coming from A + B = 1 - 2 b (w - lam) at odd order.
    RandomGen rng(406);
    for (int t = 0; t < 6; ++t) {
        int d = rng.uniform_int(1, 2);
        VectorField x = rng.field(d, 2);
        MultiPoly f = rng.poly(d, 2);
        VolumeStructure vol = rng.flat_volume(d, 2);
        Rational lam = rng.rational();
        Rational b = rng.rational(), c = rng.rational(), dd = rng.rational();

        DensityOperator delta(d);
        for (int i = 0; i < d; ++i) {
            Expo e(static_cast<size_t>(d), 0);
            e[static_cast<size_t>(i)] = 1;
            delta.add_term(e, 0, x.comp[static_cast<size_t>(i)]);
        }
        delta.add_term(Expo(static_cast<size_t>(d), 0), 0, f);

        MultiPoly divx(d), xgam(d);
        for (int i = 0; i < d; ++i) {
            divx += x.comp[static_cast<size_t>(i)].partial(i + 1);
            xgam += x.comp[static_cast<size_t>(i)] * vol.gamma[static_cast<size_t>(i)];
        }

        DensityOperator shift(d); // w - lam
        shift.add_term(Expo(static_cast<size_t>(d), 0), 1, poly("1", d));
        shift.add_term(Expo(static_cast<size_t>(d), 0), 0, MultiPoly::constant(d, -lam));

        DensityOperator want(d);
        for (int i = 0; i < d; ++i) {
            Expo e(static_cast<size_t>(d), 0);
            e[static_cast<size_t>(i)] = 1;
            want.add_term(e, 0, x.comp[static_cast<size_t>(i)]);
        }
        want = want +
               compose(shift, DensityOperator::from_poly(divx * (b - dd))) +
               compose(shift,
                       DensityOperator::from_poly(
                           xgam * (Rational(1) + b * (2 * lam - 1) - c * lam +
                                   dd * (Rational(1) - lam)))) +
               DensityOperator::from_poly(f) +
               compose(shift, DensityOperator::from_poly(f * (c + dd - 2 * b)));

        SdiffFamilyParams p = family(1, lam, b, {c}, {dd});
        require_op_eq(sdiff_family_lift(delta, p, vol), want);
    }
}

TEST_CASE("family restricts to its input at the anchor weight") {
    RandomGen rng(407);
    for (int t = 0; t < 6; ++t) {
        int d = rng.uniform_int(1, 2);
        int n = rng.uniform_int(1, 3);
        DensityOperator delta = rng.wfree_op(d, n, 2);
        Rational lam = rng.rational();
        VolumeStructure vol = rng.flat_volume(d, 2);
        std::vector<Rational> c, dd;
        for (int k = 0; k < n; ++k) {
            c.push_back(rng.rational());
            dd.push_back(rng.rational());
        }
        SdiffFamilyParams p = family(n, lam, rng.rational(), c, dd);
        require_op_eq(restrict_weight(sdiff_family_lift(delta, p, vol), lam), delta);
    }
}

TEST_CASE("family parameter validation") {
    VolumeStructure vol = trivial_volume(1);
    DensityOperator delta = op("d1", 1);
    try {
        sdiff_family_lift(delta, family(1, Rational(0), Rational(1), {}, {}), vol);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ExcludedParam);
    }
    try {
        sdiff_family_lift(op("d1^2", 1),
                          family(1, Rational(0), Rational(0), {Rational(0)}, {Rational(0)}), vol);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Order);
    }
    CHECK_THROWS_AS(
        sdiff_family_lift(op("w", 1),
                          family(1, Rational(0), Rational(0), {Rational(0)}, {Rational(0)}), vol),
        Error);
}

TEST_CASE("distinguished lift fixes the flat derivative and has a definite adjoint sign") {
    require_op_eq(distinguished_lift(op("d1", 1), 1, Rational(2), trivial_volume(1)),
                  op("d1", 1));

    RandomGen rng(408);
    for (int t = 0; t < 8; ++t) {
        int d = rng.uniform_int(1, 2);
        int n = rng.uniform_int(1, 3);
        DensityOperator delta = rng.wfree_op(d, n, 2);
        Rational lam = rng.rational_avoiding({Rational(1, 2)});
        VolumeStructure vol = rng.flat_volume(d, 2);
        DensityOperator lifted = distinguished_lift(delta, n, lam, vol);
        Rational sign = (n % 2 == 0) ? Rational(1) : Rational(-1);
        require_op_eq(adjoint(lifted), lifted * sign);
        require_op_eq(restrict_weight(lifted, lam), delta);
    }

    try {
        distinguished_lift(op("d1", 1), 1, Rational(1, 2), trivial_volume(1));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SingularWeight);
    }
}

TEST_CASE("distinguished lift is the family member with b = 1/(1 - 2 lambda)") {
    RandomGen rng(409);
    for (int t = 0; t < 6; ++t) {
        int d = rng.uniform_int(1, 2);
        int n = rng.uniform_int(1, 3);
        DensityOperator delta = rng.wfree_op(d, n, 2);
        Rational lam = rng.rational_avoiding({Rational(1, 2)});
        VolumeStructure vol = rng.flat_volume(d, 2);
        SdiffFamilyParams p = family(n, lam, Rational(1) / (Rational(1) - 2 * lam),
                                     std::vector<Rational>(static_cast<size_t>(n)),
                                     std::vector<Rational>(static_cast<size_t>(n)));
        require_op_eq(sdiff_family_lift(delta, p, vol), distinguished_lift(delta, n, lam, vol));
    }
}

TEST_CASE("distinguished lift is volume independent up to two orders down") {
    RandomGen rng(410);
    for (int n : {2, 3}) {
        for (int t = 0; t < 4; ++t) {
            int d = rng.uniform_int(1, 2);
            DensityOperator delta = rng.wfree_op(d, n, 2);
            Rational lam = rng.rational_avoiding({Rational(1, 2)});
            VolumeStructure va = rng.flat_volume(d, 2);
            VolumeStructure vb = rng.flat_volume(d, 2);
            DensityOperator diff = distinguished_lift(delta, n, lam, va) -
                                   distinguished_lift(delta, n, lam, vb);
            require_op_eq(truncate_mod_vertical(diff, n - 2), DensityOperator(d));
        }
    }
}

TEST_CASE("every family member telescopes onto the distinguished lift") {
    // family(b, c, d) - distinguished + k (w - lam)(P - (-1)^n P*) with
    // k = b - 1/(1 - 2 lam) only keeps multiplication-type terms, so it is
    // vertical of order at most n - 1.
    RandomGen rng(411);
    for (int t = 0; t < 6; ++t) {
        int d = rng.uniform_int(1, 2);
        int n = rng.uniform_int(1, 3);
        DensityOperator delta = rng.wfree_op(d, n, 2);
        Rational lam = rng.rational_avoiding({Rational(1, 2)});
        VolumeStructure vol = rng.flat_volume(d, 2);
        Rational b = rng.rational();
        std::vector<Rational> c, dd;
        for (int k = 0; k < n; ++k) {
            c.push_back(rng.rational());
            dd.push_back(rng.rational());
        }
        SdiffFamilyParams p = family(n, lam, b, c, dd);

        DensityOperator plift = volume_lift(delta, lam, vol);
        Rational sign = (n % 2 == 0) ? Rational(1) : Rational(-1);
        Rational k = b - Rational(1) / (Rational(1) - 2 * lam);
        LambdaPoly kshift = wpoly({-k * lam, k}); // k (w - lam)

        DensityOperator expr = sdiff_family_lift(delta, p, vol) -
                               distinguished_lift(delta, n, lam, vol) +
                               mul_wpoly(kshift, plift - adjoint(plift) * sign);
        require_op_eq(truncate_mod_vertical(expr, n - 1), DensityOperator(d));
    }
}

TEST_CASE("fourth-order distinguished lift: top two orders in closed form") {
    RandomGen rng(412);
    for (int t = 0; t < 4; ++t) {
        int d = rng.uniform_int(1, 2);
        DensityOperator delta(d);
        for (int j = 0; j < 4; ++j) {
            Expo a(static_cast<size_t>(d), 0);
            for (int s = 0; s < 4; ++s)
                a[static_cast<size_t>(rng.uniform_int(0, d - 1))] += 1;
            delta.add_term(a, 0, rng.poly(d, 2));
            Expo bidx(static_cast<size_t>(d), 0);
            for (int s = 0; s < 3; ++s)
                bidx[static_cast<size_t>(rng.uniform_int(0, d - 1))] += 1;
            delta.add_term(bidx, 0, rng.poly(d, 2));
        }
        Rational lam = rng.rational_avoiding({Rational(1, 2)});
        VolumeStructure vol = rng.flat_volume(d, 2);
        require_op_eq(truncate_mod_vertical(distinguished_lift(delta, 4, lam, vol), 2),
                      truncate_mod_vertical(fourth_order_top_two(delta, lam), 2));
    }
}

TEST_CASE("family lifting intertwines divergence-free fields") {
    RandomGen rng(413);
    for (int t = 0; t < 5; ++t) {
        int d = 2;
        int n = rng.uniform_int(1, 3);
        DensityOperator delta = rng.wfree_op(d, n, 2);
        Rational lam = rng.rational_avoiding({Rational(1, 2)});
        VolumeStructure vol = rng.flat_volume(d, 2);
        VectorField x = rng.rho_divfree_field(d, 3, vol);
        std::vector<Rational> c, dd;
        for (int k = 0; k < n; ++k) {
            c.push_back(rng.rational());
            dd.push_back(rng.rational());
        }
        SdiffFamilyParams p = family(n, lam, rng.rational(), c, dd);

        auto lift = [&](const DensityOperator& input) {
            return sdiff_family_lift(input, p, vol);
        };
        require_op_eq(lift(ad_at_weight(x, delta, lam)), ad_action(x, lift(delta)));

        // The bare volume lift and the distinguished member intertwine too.
        require_op_eq(volume_lift(ad_at_weight(x, delta, lam), lam, vol),
                      ad_action(x, volume_lift(delta, lam, vol)));
        require_op_eq(distinguished_lift(ad_at_weight(x, delta, lam), n, lam, vol),
                      ad_action(x, distinguished_lift(delta, n, lam, vol)));
    }
}
