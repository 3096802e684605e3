#pragma once

#include <catch2/catch_amalgamated.hpp>

#include "densops/dlo.hpp"
#include "densops/json_io.hpp"
#include "densops/operators.hpp"
#include "densops/parse.hpp"
#include "densops/pencils.hpp"
#include "densops/random_gen.hpp"
#include "densops/volume.hpp"

namespace densops::testing {

/// Parses an operator expression, failing the test on malformed input.
inline DensityOperator op(const std::string& src, int d) { return parse_operator(src, d); }

/// Parses a polynomial coefficient expression.
inline MultiPoly poly(const std::string& src, int d) { return parse_poly(src, d); }

inline Rational rat(const std::string& src) { return parse_rational(src); }

/// Builds a weight polynomial from ascending coefficients without tripping
/// over brace-initialization overload ambiguity.
inline LambdaPoly wpoly(std::vector<Rational> asc) { return LambdaPoly(std::move(asc)); }

/// One shared table per (dim, order); keeps repeated solver runs out of the
/// test suite's budget.
inline const DLOCoefficientTable& table(int d, int n) {
    static std::map<std::pair<int, int>, DLOCoefficientTable> memo;
    auto it = memo.find({d, n});
    if (it == memo.end()) it = memo.emplace(std::make_pair(d, n), solve_dlo_table(d, n)).first;
    return it->second;
}

/// Matcher-style helper: message-bearing check that two operators agree.
inline void require_op_eq(const DensityOperator& got, const DensityOperator& want) {
    INFO("got:  " << op_to_json(got).dump());
    INFO("want: " << op_to_json(want).dump());
    REQUIRE(got == want);
}

} // namespace densops::testing
