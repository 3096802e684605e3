#pragma once

#include <utility>
#include <vector>

#include "densops/error.hpp"
#include "densops/lambdapoly.hpp"
#include "densops/rational.hpp"

namespace densops {

struct LinearSolveResult {
    bool consistent = false;
    int rank = 0;
    int kernel_rank = 0;
    /// One particular solution (free variables set to 0); empty when inconsistent.
    std::vector<Rational> solution;
};

namespace detail {

/// Exact integer division; a nonzero remainder means the elimination's
/// fraction-free invariant was broken, which is a programming error.
inline Int exact_div(const Int& a, const Int& b) {
    Int q, r;
    boost::multiprecision::divide_qr(a, b, q, r);
    if (r != 0) throw std::logic_error("fraction-free elimination: inexact division");
    return q;
}

} // namespace detail

/// Solves A x = b exactly over the rationals with fraction-free (Bareiss)
/// elimination on an integer-scaled augmented matrix. A is m x n given as
/// rows. Returns a particular solution with free variables set to zero,
/// together with rank information, or consistent=false if no solution exists.
inline LinearSolveResult solve_linear_exact(const std::vector<std::vector<Rational>>& A,
                                            const std::vector<Rational>& b) {
    const size_t m = A.size();
    if (b.size() != m) throw Error(ErrorCode::Dim, "rhs length does not match row count");
    const size_t n = m == 0 ? 0 : A[0].size();
    for (const auto& row : A)
        if (row.size() != n) throw Error(ErrorCode::Dim, "ragged coefficient matrix");

    // Clear denominators row by row.
    std::vector<std::vector<Int>> M(m, std::vector<Int>(n + 1));
    for (size_t i = 0; i < m; ++i) {
        Int l = 1;
        for (size_t j = 0; j < n; ++j)
            l = boost::multiprecision::lcm(l, boost::multiprecision::denominator(A[i][j]));
        l = boost::multiprecision::lcm(l, boost::multiprecision::denominator(b[i]));
        for (size_t j = 0; j < n; ++j) {
            M[i][j] = boost::multiprecision::numerator(A[i][j]) *
                      (l / boost::multiprecision::denominator(A[i][j]));
        }
        M[i][n] = boost::multiprecision::numerator(b[i]) *
                  (l / boost::multiprecision::denominator(b[i]));
    }

    std::vector<size_t> pivot_col;
    Int prev = 1;
    size_t row = 0;
    for (size_t col = 0; col < n && row < m; ++col) {
        size_t sel = row;
        while (sel < m && M[sel][col] == 0) ++sel;
        if (sel == m) continue;
        std::swap(M[sel], M[row]);
        for (size_t i = row + 1; i < m; ++i) {
            for (size_t j = col + 1; j <= n; ++j)
                M[i][j] = detail::exact_div(M[row][col] * M[i][j] - M[i][col] * M[row][j], prev);
            M[i][col] = 0;
        }
        prev = M[row][col];
        pivot_col.push_back(col);
        ++row;
    }

    LinearSolveResult res;
    res.rank = static_cast<int>(pivot_col.size());
    res.kernel_rank = static_cast<int>(n) - res.rank;

    for (size_t i = pivot_col.size(); i < m; ++i)
        if (M[i][n] != 0) {
            res.consistent = false;
            return res;
        }

    res.consistent = true;
    res.solution.assign(n, Rational(0));
    for (size_t p = pivot_col.size(); p-- > 0;) {
        const size_t c = pivot_col[p];
        Rational acc(M[p][n]);
        for (size_t j = c + 1; j < n; ++j)
            if (M[p][j] != 0 && res.solution[j] != 0) acc -= Rational(M[p][j]) * res.solution[j];
        res.solution[c] = acc / Rational(M[p][c]);
    }
    return res;
}

/// Convenience check used by tests: does A x equal b?
inline bool linear_residual_is_zero(const std::vector<std::vector<Rational>>& A,
                                    const std::vector<Rational>& b,
                                    const std::vector<Rational>& x) {
    for (size_t i = 0; i < A.size(); ++i) {
        Rational acc(0);
        for (size_t j = 0; j < A[i].size(); ++j) acc += A[i][j] * x[j];
        if (acc != b[i]) return false;
    }
    return true;
}

/// Recovers the unique polynomial of degree <= max_degree through the given
/// (node, value) samples via Newton divided differences, then checks every
/// remaining sample against it. Duplicate nodes, too few samples, or samples
/// demanding a higher degree are reported as table errors.
inline LambdaPoly interpolate_lambda(const std::vector<std::pair<Rational, Rational>>& samples,
                                     int max_degree) {
    if (max_degree < 0) throw Error(ErrorCode::Table, "negative interpolation degree");
    const size_t need = static_cast<size_t>(max_degree) + 1;
    if (samples.size() < need)
        throw Error(ErrorCode::Table,
                    "interpolation needs at least " + std::to_string(need) + " samples, got " +
                        std::to_string(samples.size()));
    for (size_t i = 0; i < samples.size(); ++i)
        for (size_t j = i + 1; j < samples.size(); ++j)
            if (samples[i].first == samples[j].first)
                throw Error(ErrorCode::Table, "duplicate interpolation node " +
                                                  rational_to_string(samples[i].first));

    // Divided differences on the first max_degree+1 samples.
    std::vector<Rational> dd(need);
    for (size_t i = 0; i < need; ++i) dd[i] = samples[i].second;
    for (size_t level = 1; level < need; ++level)
        for (size_t i = need - 1; i >= level; --i)
            dd[i] = (dd[i] - dd[i - 1]) / (samples[i].first - samples[i - level].first);

    LambdaPoly p(dd[need - 1]);
    for (size_t j = need - 1; j-- > 0;) {
        LambdaPoly lin(std::vector<Rational>{-samples[j].first, Rational(1)});
        p = p * lin + LambdaPoly(dd[j]);
    }

    for (const auto& [x, y] : samples)
        if (p.eval(x) != y)
            throw Error(ErrorCode::Table, "samples exceed interpolation degree " +
                                              std::to_string(max_degree) + " at node " +
                                              rational_to_string(x));
    return p;
}

} // namespace densops
