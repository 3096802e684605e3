#include "support.hpp"

using namespace densops;
using densops::testing::poly;
using densops::testing::rat;

TEST_CASE("rational helpers") {
    CHECK(make_rational(6, 4) == Rational(3, 2));
    CHECK(rat_pow(Rational(2, 3), 3) == Rational(8, 27));
    CHECK(rat_pow(Rational(2, 3), -2) == Rational(9, 4));
    CHECK(rat_pow(Rational(0), 0) == 1);
    CHECK_THROWS_AS(rat_pow(Rational(0), -1), Error);
    CHECK(rat_factorial(5) == 120);
    CHECK(rat_binomial(7, 3) == 35);
    CHECK(rat_binomial(3, 7) == 0);
    CHECK(rational_to_string(Rational(-5, 3)) == "-5/3");
    CHECK(rational_to_string(Rational(4)) == "4");
}

TEST_CASE("multivariate polynomial ring axioms hold on random samples") {
    RandomGen rng(31);
    for (int t = 0; t < 25; ++t) {
        int d = rng.uniform_int(1, 3);
        MultiPoly a = rng.poly(d, 3), b = rng.poly(d, 3), c = rng.poly(d, 3);
        CHECK((a + b) + c == a + (b + c));
        CHECK((a * b) * c == a * (b * c));
        CHECK(a * (b + c) == a * b + a * c);
        CHECK(a * b == b * a);
        CHECK(a + MultiPoly(d) == a);
        CHECK(a * MultiPoly::constant(d, 1) == a);
        CHECK(a - a == MultiPoly(d));
    }
}

TEST_CASE("polynomial evaluation is a ring homomorphism") {
    RandomGen rng(32);
    for (int t = 0; t < 20; ++t) {
        int d = rng.uniform_int(1, 3);
        MultiPoly a = rng.poly(d, 3), b = rng.poly(d, 3);
        std::vector<Rational> pt;
        for (int i = 0; i < d; ++i) pt.push_back(rng.rational());
        CHECK((a + b).eval(pt) == a.eval(pt) + b.eval(pt));
        CHECK((a * b).eval(pt) == a.eval(pt) * b.eval(pt));
    }
}

TEST_CASE("partial derivatives commute and satisfy the Leibniz rule") {
    RandomGen rng(33);
    for (int t = 0; t < 20; ++t) {
        int d = rng.uniform_int(2, 3);
        MultiPoly a = rng.poly(d, 4), b = rng.poly(d, 4);
        int i = rng.uniform_int(1, d), j = rng.uniform_int(1, d);
        CHECK(a.partial(i).partial(j) == a.partial(j).partial(i));
        CHECK((a * b).partial(i) == a.partial(i) * b + a * b.partial(i));
    }
}

TEST_CASE("iterated partial derivative matches repeated single derivatives") {
    MultiPoly f = poly("x1^3*x2^2 + 2*x1*x2", 2);
    Expo e{2, 1};
    CHECK(f.partial_multi(e) == f.partial(1).partial(1).partial(2));
}

TEST_CASE("dimension mismatches are rejected") {
    MultiPoly a = MultiPoly::variable(2, 1);
    MultiPoly b = MultiPoly::variable(3, 1);
    CHECK_THROWS_AS(a + b, Error);
    try {
        a* b;
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Dim);
    }
}

TEST_CASE("canonical text form orders terms by total degree then lexicographically") {
    MultiPoly f = poly("x2 + x1 - 3/2*x1^2*x2 + 1", 2);
    CHECK(f.str() == "-3/2*x1^2*x2 + x1 + x2 + 1");
    CHECK(MultiPoly(2).str() == "0");
    CHECK(poly("-x1", 1).str() == "-x1");
    // Printing and reparsing is the identity on the polynomial.
    RandomGen rng(34);
    for (int t = 0; t < 30; ++t) {
        MultiPoly g = rng.poly(rng.uniform_int(1, 3), 4);
        CHECK(parse_poly(g.str(), g.dim()) == g);
    }
}

TEST_CASE("weight polynomial arithmetic and affine substitution") {
    LambdaPoly p = densops::testing::wpoly({Rational(1), Rational(0), Rational(2)}); // 1 + 2 w^2
    LambdaPoly q = LambdaPoly::variable();                 // w
    CHECK(p.degree() == 2);
    CHECK(p.eval(Rational(3)) == 19);
    CHECK((p * q).coeff(3) == 2);
    CHECK((p + q).coeff(1) == 1);
    CHECK(p - p == LambdaPoly());
    // p(2w - 1) expanded directly.
    LambdaPoly s = p.compose_affine(Rational(2), Rational(-1));
    CHECK(s == densops::testing::wpoly({Rational(3), Rational(-8), Rational(8)}));
    CHECK(densops::testing::wpoly({Rational(0), Rational(1)}).pow(3).coeff(3) == 1);
    CHECK(p.str("w") == "2*w^2 + 1");
}

TEST_CASE("exact linear solve returns a genuine solution") {
    RandomGen rng(35);
    for (int t = 0; t < 25; ++t) {
        int n = rng.uniform_int(1, 6);
        int m = rng.uniform_int(n, n + 3);
        // Build a system with a known solution so consistency is guaranteed.
        std::vector<Rational> xstar;
        for (int j = 0; j < n; ++j) xstar.push_back(rng.rational());
        std::vector<std::vector<Rational>> a(m, std::vector<Rational>(n));
        std::vector<Rational> b(m, Rational(0));
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) {
                a[i][j] = rng.rational();
                b[i] += a[i][j] * xstar[j];
            }
        LinearSolveResult r = solve_linear_exact(a, b);
        REQUIRE(r.consistent);
        CHECK(linear_residual_is_zero(a, b, r.solution));
        CHECK(r.rank + r.kernel_rank == n);
    }
}

TEST_CASE("exact linear solve flags inconsistency and counts the kernel") {
    // x + y = 1, x + y = 2 is inconsistent.
    std::vector<std::vector<Rational>> a{{1, 1}, {1, 1}};
    std::vector<Rational> b{Rational(1), Rational(2)};
    CHECK_FALSE(solve_linear_exact(a, b).consistent);

    // One equation in three unknowns: rank 1, kernel rank 2.
    std::vector<std::vector<Rational>> a2{{Rational(2), Rational(0), Rational(-1)}};
    std::vector<Rational> b2{Rational(4)};
    LinearSolveResult r = solve_linear_exact(a2, b2);
    REQUIRE(r.consistent);
    CHECK(r.rank == 1);
    CHECK(r.kernel_rank == 2);
    CHECK(linear_residual_is_zero(a2, b2, r.solution));

    // Unique solution of an invertible 2x2 system.
    std::vector<std::vector<Rational>> a3{{Rational(1), Rational(2)}, {Rational(3), Rational(-1)}};
    std::vector<Rational> b3{Rational(5), Rational(1)};
    LinearSolveResult r3 = solve_linear_exact(a3, b3);
    REQUIRE(r3.consistent);
    CHECK(r3.kernel_rank == 0);
    CHECK(r3.solution == std::vector<Rational>{Rational(1), Rational(2)});
}

TEST_CASE("polynomial interpolation reproduces the sampled polynomial exactly") {
    RandomGen rng(36);
    for (int t = 0; t < 20; ++t) {
        int deg = rng.uniform_int(0, 4);
        std::vector<Rational> coeffs;
        for (int j = 0; j <= deg; ++j) coeffs.push_back(rng.rational());
        LambdaPoly p(coeffs);
        std::vector<std::pair<Rational, Rational>> samples;
        for (int s = 0; s <= deg + 2; ++s) {
            Rational node(s - 2);
            samples.emplace_back(node, p.eval(node));
        }
        CHECK(interpolate_lambda(samples, deg) == p);
    }
}

TEST_CASE("interpolation rejects bad sample sets") {
    std::vector<std::pair<Rational, Rational>> quad = {
        {Rational(0), Rational(0)}, {Rational(1), Rational(1)}, {Rational(2), Rational(4)}};
    CHECK(interpolate_lambda(quad, 2) == densops::testing::wpoly({Rational(0), Rational(0), Rational(1)}));
    // Degree bound 1 cannot carry the quadratic samples.
    try {
        interpolate_lambda(quad, 1);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Table);
    }
    // Duplicate nodes are rejected.
    std::vector<std::pair<Rational, Rational>> dup = {
        {Rational(1), Rational(1)}, {Rational(1), Rational(2)}, {Rational(3), Rational(4)}};
    CHECK_THROWS_AS(interpolate_lambda(dup, 2), Error);
    // Fewer samples than the degree needs.
    std::vector<std::pair<Rational, Rational>> few = {{Rational(0), Rational(1)}};
    CHECK_THROWS_AS(interpolate_lambda(few, 1), Error);
}

TEST_CASE("polynomial text grammar accepts the documented forms") {
    CHECK(poly("3", 1) == MultiPoly::constant(1, 3));
    CHECK(poly("-2/3*x1^2", 1).coefficient(Expo{2}) == Rational(-2, 3));
    CHECK(poly("x1*x2 - x2*x1", 2).is_zero());
    CHECK(poly("2*x1 + 3*x1", 1) == poly("5*x1", 1));
    CHECK_THROWS_AS(poly("x4", 3), Error);
    CHECK_THROWS_AS(poly("x1 +", 1), Error);
    CHECK_THROWS_AS(poly("", 1), Error);
    try {
        poly("x1 + $", 1);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Parse);
        CHECK(std::string(e.what()).find("column 6") != std::string::npos);
    }
}
