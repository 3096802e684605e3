#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "densops/error.hpp"
#include "densops/linalg.hpp"
#include "densops/operators.hpp"
#include "densops/symbols.hpp"

namespace densops {

/// Coefficients of the projectively equivariant symbol map and its inverse
/// quantization, up to a maximal operator order. c[k][r] multiplies the
/// normalized r-fold divergence of the degree-k symbol slice inside the
/// symbol map; ctilde[k][r] plays the same role for quantization. Both are
/// polynomials in the weight, with c[k][0] = ctilde[k][0] = 1.
struct DLOCoefficientTable {
    int dim = 0;
    int max_order = 0;
    std::vector<std::vector<LambdaPoly>> c;
    std::vector<std::vector<LambdaPoly>> ctilde;
};

namespace detail {

/// Incremental exact row reduction for small dense systems: rows are fed one
/// at a time and kept in reduced echelon form. Detects inconsistency and
/// counts redundant (consistent) rows so callers can stop early once the
/// system is pinned down with surplus confirmation.
class IncrementalEchelon {
public:
    explicit IncrementalEchelon(int ncols) : ncols_(ncols) {}

    void feed(std::vector<Rational> row) {
        for (size_t i = 0; i < rows_.size(); ++i) {
            const int p = pivots_[i];
            if (row[static_cast<size_t>(p)] == 0) continue;
            const Rational f = row[static_cast<size_t>(p)];
            for (size_t j = 0; j <= static_cast<size_t>(ncols_); ++j)
                row[j] -= f * rows_[i][j];
        }
        int p = -1;
        for (int j = 0; j < ncols_; ++j)
            if (row[static_cast<size_t>(j)] != 0) {
                p = j;
                break;
            }
        if (p < 0) {
            if (row[static_cast<size_t>(ncols_)] != 0) inconsistent_ = true;
            else ++surplus_;
            return;
        }
        const Rational lead = row[static_cast<size_t>(p)];
        for (auto& v : row) v /= lead;
        for (size_t i = 0; i < rows_.size(); ++i) {
            const Rational f = rows_[i][static_cast<size_t>(p)];
            if (f == 0) continue;
            for (size_t j = 0; j <= static_cast<size_t>(ncols_); ++j)
                rows_[i][j] -= f * row[j];
        }
        rows_.push_back(std::move(row));
        pivots_.push_back(p);
    }

    bool inconsistent() const { return inconsistent_; }
    int rank() const { return static_cast<int>(rows_.size()); }
    int surplus() const { return surplus_; }
    const std::vector<std::vector<Rational>>& rows() const { return rows_; }
    const std::vector<int>& pivots() const { return pivots_; }

private:
    int ncols_;
    std::vector<std::vector<Rational>> rows_;
    std::vector<int> pivots_;
    int surplus_ = 0;
    bool inconsistent_ = false;
};

/// All exponent vectors in d variables with total degree exactly g.
inline void monomials_of_degree(int d, int g, std::vector<Expo>& out) {
    Expo e(static_cast<size_t>(d), 0);
    // Odometer over compositions of g into d parts.
    std::function<void(int, int)> rec = [&](int pos, int left) {
        if (pos == d - 1) {
            e[static_cast<size_t>(pos)] = static_cast<unsigned>(left);
            out.push_back(e);
            return;
        }
        for (int v = 0; v <= left; ++v) {
            e[static_cast<size_t>(pos)] = static_cast<unsigned>(v);
            rec(pos + 1, left - v);
        }
    };
    if (d == 0) return;
    rec(0, g);
}

/// Attempts to solve for the order-k symbol-map coefficients at one fixed
/// weight sample. Returns nothing when the sample is resonant (the
/// equivariance system fails to pin the coefficients down uniquely).
inline std::optional<std::vector<Rational>> dlo_solve_at_sample(
    int d, int k, const Rational& lam, const std::vector<std::vector<LambdaPoly>>& lower_c) {
    std::vector<std::vector<Rational>> cl(static_cast<size_t>(k));
    for (int j = 0; j < k; ++j) {
        cl[static_cast<size_t>(j)].resize(static_cast<size_t>(j) + 1);
        for (int r = 0; r <= j; ++r)
            cl[static_cast<size_t>(j)][static_cast<size_t>(r)] =
                lower_c[static_cast<size_t>(j)][static_cast<size_t>(r)].eval(lam);
    }

    const auto specials = proj_special_generators(d);
    IncrementalEchelon sys(k);

    std::vector<Expo> alphas;
    monomials_of_degree(d, k, alphas);

    bool done = false;
    for (int g = 0; g <= k + 1 && !done; ++g) {
        std::vector<Expo> betas;
        monomials_of_degree(d, g, betas);
        for (const Expo& beta : betas) {
            for (const Expo& alpha : alphas) {
                DensityOperator delta =
                    DensityOperator::term(d, alpha, 0, MultiPoly::monomial(d, beta, Rational(1)));
                SymbolPoly pk = symbol_of_order(delta, k);
                for (const VectorField& kv : specials) {
                    DensityOperator adl = ad_at_weight(kv, delta, lam);

                    // sigma_lam(ad delta) with the order-k divergences split off
                    // as unknowns; everything of lower order uses the table built
                    // so far, and the r = 0 term of order k is known (c_0 = 1).
                    SymbolPoly known(d);
                    for (int j = 0; j < k; ++j) {
                        SymbolPoly sj = symbol_of_order(adl, j);
                        if (sj.is_zero()) continue;
                        for (int r = 0; r <= j; ++r)
                            known += cl[static_cast<size_t>(j)][static_cast<size_t>(r)] *
                                     div_series_term(sj, j, r);
                    }
                    SymbolPoly adk = symbol_of_order(adl, k);
                    known += div_series_term(adk, k, 0);

                    std::vector<SymbolPoly> unknown;
                    unknown.reserve(static_cast<size_t>(k));
                    for (int r = 1; r <= k; ++r) {
                        SymbolPoly e = adk.is_zero() ? SymbolPoly(d) : div_series_term(adk, k, r);
                        e -= symbol_lie(kv, div_series_term(pk, k, r));
                        unknown.push_back(std::move(e));
                    }
                    known -= symbol_lie(kv, div_series_term(pk, k, 0));

                    // Project E = sum_r u_r * unknown[r] + known onto monomials.
                    std::map<Expo, std::map<Expo, std::vector<Rational>>, GradedLexDesc> rowmap;
                    auto collect = [&](const SymbolPoly& s, int slot) {
                        for (const auto& [xi, cpoly] : s.terms())
                            for (const auto& [xe, coeff] : cpoly.terms()) {
                                auto& vec = rowmap[xi][xe];
                                if (vec.empty()) vec.assign(static_cast<size_t>(k) + 1, Rational(0));
                                vec[static_cast<size_t>(slot)] += coeff;
                            }
                    };
                    for (int r = 1; r <= k; ++r) collect(unknown[static_cast<size_t>(r - 1)], r - 1);
                    collect(known, k);

                    for (auto& [xi, bycoeff] : rowmap)
                        for (auto& [xe, vec] : bycoeff) {
                            // Move the known part to the right-hand side.
                            vec[static_cast<size_t>(k)] = -vec[static_cast<size_t>(k)];
                            sys.feed(std::move(vec));
                            if (sys.inconsistent()) return std::nullopt;
                        }
                    if (sys.rank() == k && sys.surplus() >= 8) {
                        done = true;
                        break;
                    }
                }
                if (done) break;
            }
            if (done) break;
        }
    }
    if (sys.rank() < k) return std::nullopt;

    // Route the pinned-down system through the general solver as a final
    // consistency gate: it must be uniquely solvable.
    std::vector<std::vector<Rational>> a;
    std::vector<Rational> b;
    for (const auto& row : sys.rows()) {
        a.emplace_back(row.begin(), row.end() - 1);
        b.push_back(row.back());
    }
    LinearSolveResult res = solve_linear_exact(a, b);
    if (!res.consistent || res.kernel_rank != 0) return std::nullopt;
    return res.solution;
}

} // namespace detail

/// Known closed forms for the second-order quantization coefficients.
inline LambdaPoly dlo_a_closed(int d) {
    const Rational dd(d);
    return LambdaPoly(std::vector<Rational>{Rational(2) / (dd + 3), Rational(2) * (dd + 1) / (dd + 3)});
}
inline LambdaPoly dlo_b_closed(int d) {
    const Rational dd(d);
    const Rational den = (dd + 2) * (dd + 3);
    return LambdaPoly(std::vector<Rational>{Rational(0), (dd + 1) / den, (dd + 1) * (dd + 1) / den});
}

/// Builds the coefficient table for dimension d up to operator order n by
/// imposing equivariance under the special projective generators at enough
/// weight samples and interpolating exactly. Resonant samples are skipped;
/// the search covers integer weights with |weight| <= 40.
inline DLOCoefficientTable solve_dlo_table(int d, int n) {
    if (d < 1) throw Error(ErrorCode::Dim, "solve_dlo_table: dimension must be >= 1");
    if (n < 0) throw Error(ErrorCode::Order, "solve_dlo_table: order must be >= 0");

    DLOCoefficientTable table;
    table.dim = d;
    table.max_order = n;
    table.c.assign(static_cast<size_t>(n) + 1, {});
    table.c[0] = {LambdaPoly(Rational(1))};

    for (int k = 1; k <= n; ++k) {
        const size_t want = static_cast<size_t>(k) + 3;
        std::vector<Rational> nodes;
        std::vector<std::vector<Rational>> values; // values[s][r-1]
        for (int step = 0; step <= 80 && nodes.size() < want; ++step) {
            // 0, -1, 1, -2, 2, ..., -40, 40
            const int v = (step + 1) / 2;
            const Rational lam = (step % 2 == 1) ? Rational(-v) : Rational(v);
            auto sol = detail::dlo_solve_at_sample(d, k, lam, table.c);
            if (!sol) continue;
            nodes.push_back(lam);
            values.push_back(*sol);
        }
        if (nodes.size() < want)
            throw Error(ErrorCode::Table,
                        "solve_dlo_table: could not find " + std::to_string(want) +
                            " non-resonant integer weight samples with |weight| <= 40 at order " +
                            std::to_string(k));
        table.c[static_cast<size_t>(k)].assign(static_cast<size_t>(k) + 1, LambdaPoly());
        table.c[static_cast<size_t>(k)][0] = LambdaPoly(Rational(1));
        for (int r = 1; r <= k; ++r) {
            std::vector<std::pair<Rational, Rational>> pts;
            pts.reserve(nodes.size());
            for (size_t s = 0; s < nodes.size(); ++s)
                pts.emplace_back(nodes[s], values[s][static_cast<size_t>(r - 1)]);
            table.c[static_cast<size_t>(k)][static_cast<size_t>(r)] = interpolate_lambda(pts, r);
        }
    }

    // Guard against convention drift: the first- and second-order columns have
    // known closed forms.
    if (n >= 1 && table.c[1][1] != LambdaPoly(std::vector<Rational>{Rational(0), Rational(-1)}))
        throw Error(ErrorCode::Table, "solve_dlo_table: first-order coefficient contradicts -lam");
    if (n >= 2) {
        if (table.c[2][1] != -dlo_a_closed(d))
            throw Error(ErrorCode::Table,
                        "solve_dlo_table: second-order coefficient contradicts the known closed form");
        // c_2^(2) = lam (lam (d+1) + 1) / (d+2)
        const Rational dd(d);
        LambdaPoly u(std::vector<Rational>{Rational(1), dd + 1});
        if (table.c[2][2] != LambdaPoly::variable() * u * (Rational(1) / (dd + 2)))
            throw Error(ErrorCode::Table,
                        "solve_dlo_table: second-order coefficient contradicts the known closed form");
    }

    // Quantization coefficients from the inverse-expansion recurrence
    //   ctilde_p^(k) = - sum_{i=1..p} ctilde_{p-i}^(k-i) c_i^(k),  ctilde_0 = 1.
    table.ctilde.assign(static_cast<size_t>(n) + 1, {});
    for (int k = 0; k <= n; ++k) {
        table.ctilde[static_cast<size_t>(k)].assign(static_cast<size_t>(k) + 1, LambdaPoly());
        table.ctilde[static_cast<size_t>(k)][0] = LambdaPoly(Rational(1));
        for (int p = 1; p <= k; ++p) {
            LambdaPoly acc;
            for (int i = 1; i <= p; ++i)
                acc += table.ctilde[static_cast<size_t>(k - i)][static_cast<size_t>(p - i)] *
                       table.c[static_cast<size_t>(k)][static_cast<size_t>(i)];
            table.ctilde[static_cast<size_t>(k)][static_cast<size_t>(p)] = -acc;
        }
    }
    if (n >= 2 &&
        (table.ctilde[2][1] != dlo_a_closed(d) || table.ctilde[2][2] != dlo_b_closed(d)))
        throw Error(ErrorCode::Table,
                    "solve_dlo_table: quantization coefficients contradict the known closed forms");
    return table;
}

namespace detail {

inline void check_table_compat(const DensityOperator& a, const DLOCoefficientTable& table,
                               const char* who) {
    if (a.dim() != table.dim)
        throw Error(ErrorCode::Dim, std::string(who) + ": operator dimension " +
                                        std::to_string(a.dim()) + " does not match table dimension " +
                                        std::to_string(table.dim));
    if (a.spatial_order() > table.max_order)
        throw Error(ErrorCode::Order, std::string(who) + ": operator order " +
                                          std::to_string(a.spatial_order()) +
                                          " exceeds table order " + std::to_string(table.max_order));
}

} // namespace detail

/// The projectively equivariant full symbol of a weight-free operator
/// acting on weight-lam densities.
inline SymbolPoly full_symbol(const DensityOperator& delta, const Rational& lam,
                              const DLOCoefficientTable& table) {
    detail::require_weight_free(delta, "full_symbol");
    detail::check_table_compat(delta, table, "full_symbol");
    SymbolPoly out(delta.dim());
    const int n = delta.spatial_order();
    for (int k = 0; k <= n; ++k) {
        SymbolPoly pk = symbol_of_order(delta, k);
        if (pk.is_zero()) continue;
        for (int r = 0; r <= k; ++r)
            out += table.c[static_cast<size_t>(k)][static_cast<size_t>(r)].eval(lam) *
                   div_series_term(pk, k, r);
    }
    return out;
}

/// The inverse quantization at a fixed weight mu.
inline DensityOperator quantize(const SymbolPoly& sym, const Rational& mu,
                                const DLOCoefficientTable& table) {
    if (sym.dim() != table.dim) throw Error(ErrorCode::Dim, "quantize: dimension mismatch");
    if (sym.degree() > table.max_order)
        throw Error(ErrorCode::Order, "quantize: symbol degree " + std::to_string(sym.degree()) +
                                          " exceeds table order " + std::to_string(table.max_order));
    DensityOperator out(sym.dim());
    for (int k = 0; k <= sym.degree(); ++k) {
        SymbolPoly pk = sym.part_of_degree(k);
        if (pk.is_zero()) continue;
        for (int r = 0; r <= k; ++r)
            out += table.ctilde[static_cast<size_t>(k)][static_cast<size_t>(r)].eval(mu) *
                   symbol_to_operator(div_series_term(pk, k, r));
    }
    return out;
}

/// Quantization with the weight left as the central weight operator: the
/// result acts on every weight at once.
inline DensityOperator quantize_hat(const SymbolPoly& sym, const DLOCoefficientTable& table) {
    if (sym.dim() != table.dim) throw Error(ErrorCode::Dim, "quantize_hat: dimension mismatch");
    if (sym.degree() > table.max_order)
        throw Error(ErrorCode::Order, "quantize_hat: symbol degree " + std::to_string(sym.degree()) +
                                          " exceeds table order " + std::to_string(table.max_order));
    DensityOperator out(sym.dim());
    for (int k = 0; k <= sym.degree(); ++k) {
        SymbolPoly pk = sym.part_of_degree(k);
        if (pk.is_zero()) continue;
        for (int r = 0; r <= k; ++r)
            out += mul_wpoly(table.ctilde[static_cast<size_t>(k)][static_cast<size_t>(r)],
                             symbol_to_operator(div_series_term(pk, k, r)));
    }
    return out;
}

/// Projective pencil lifting: quantize the full symbol with the weight kept
/// operator-valued. Restricting the result back to weight lam recovers the
/// input exactly.
inline DensityOperator dlo_pencil(const DensityOperator& delta, const Rational& lam,
                                  const DLOCoefficientTable& table) {
    detail::require_weight_free(delta, "dlo_pencil");
    detail::check_table_compat(delta, table, "dlo_pencil");
    return quantize_hat(full_symbol(delta, lam, table), table);
}

/// Splits a weight-free operator into graded components: repeatedly
/// quantizes the principal symbol of the remainder at weight lam and
/// subtracts. Returns components by descending order (degree n first); their
/// sum is the input.
inline std::vector<DensityOperator> graded_decompose(const DensityOperator& delta,
                                                     const Rational& lam,
                                                     const DLOCoefficientTable& table) {
    detail::require_weight_free(delta, "graded_decompose");
    detail::check_table_compat(delta, table, "graded_decompose");
    const int n = std::max(0, delta.spatial_order());
    std::vector<DensityOperator> out;
    out.reserve(static_cast<size_t>(n) + 1);
    DensityOperator rest = delta;
    for (int k = n; k >= 0; --k) {
        SymbolPoly pk = symbol_of_order(rest, k);
        DensityOperator comp = quantize(pk, lam, table);
        rest -= comp;
        out.push_back(std::move(comp));
        if (rest.spatial_order() >= k)
            throw std::logic_error("graded_decompose: order failed to drop");
    }
    if (!rest.is_zero()) throw std::logic_error("graded_decompose: nonzero remainder");
    return out;
}

// ---------------------------------------------------------------------------
// Triangular families of liftings
// ---------------------------------------------------------------------------

struct TriangularFamilyParams {
    int n = 0;
    Rational lam;
    /// rows[i] holds the ascending weight-polynomial coefficients of P_i,
    /// with deg P_i <= i (so rows[i] has i+1 entries).
    std::vector<std::vector<Rational>> rows;
};

namespace detail {

inline void validate_triangular_rows(int n, const std::vector<std::vector<Rational>>& rows) {
    if (rows.size() != static_cast<size_t>(n) + 1)
        throw Error(ErrorCode::ExcludedParam,
                    "triangular family: expected " + std::to_string(n + 1) + " rows");
    for (int i = 0; i <= n; ++i) {
        const auto& row = rows[static_cast<size_t>(i)];
        if (row.size() != static_cast<size_t>(i) + 1)
            throw Error(ErrorCode::ExcludedParam, "triangular family: row " + std::to_string(i) +
                                                      " must have " + std::to_string(i + 1) +
                                                      " entries");
        bool nonzero = false;
        for (const auto& v : row) nonzero = nonzero || v != 0;
        if (!nonzero)
            throw Error(ErrorCode::ExcludedParam,
                        "triangular family: row " + std::to_string(i) + " is identically zero");
    }
}

} // namespace detail

/// Lifting built from a lower-triangular matrix of weight polynomials: write
/// delta = sum of graded components delta_{n-i} and return
///   sum_i P_i(w)/P_i(lam) * PencilLift(delta_{n-i}),
/// where PencilLift is the projective pencil. Rows with P_i(lam) = 0 are
/// singular for that weight.
inline DensityOperator triangular_family_lift(const DensityOperator& delta,
                                              const TriangularFamilyParams& tp,
                                              const DLOCoefficientTable& table) {
    detail::require_weight_free(delta, "triangular_family_lift");
    if (tp.n < 0) throw Error(ErrorCode::Order, "triangular_family_lift: negative order");
    detail::validate_triangular_rows(tp.n, tp.rows);
    detail::require_order_at_most(delta, tp.n, "triangular_family_lift");
    if (tp.n > table.max_order)
        throw Error(ErrorCode::Order, "triangular_family_lift: family order " +
                                          std::to_string(tp.n) + " exceeds table order " +
                                          std::to_string(table.max_order));
    if (delta.dim() != table.dim)
        throw Error(ErrorCode::Dim, "triangular_family_lift: dimension mismatch");

    std::vector<Rational> at_lam(static_cast<size_t>(tp.n) + 1);
    for (int i = 0; i <= tp.n; ++i) {
        at_lam[static_cast<size_t>(i)] = LambdaPoly(tp.rows[static_cast<size_t>(i)]).eval(tp.lam);
        if (at_lam[static_cast<size_t>(i)] == 0)
            throw Error(ErrorCode::SingularWeight,
                        "triangular_family_lift: row " + std::to_string(i) +
                            " vanishes at weight " + rational_to_string(tp.lam));
    }

    // Graded components by descending degree, padded to exactly n+1 entries.
    std::vector<DensityOperator> comps = graded_decompose(delta, tp.lam, table);
    std::vector<DensityOperator> by_desc(static_cast<size_t>(tp.n) + 1, DensityOperator(delta.dim()));
    const int have = static_cast<int>(comps.size()); // = spatial order + 1
    for (int j = 0; j < have; ++j) {
        // comps[j] has degree (have-1) - j; store at descending slot for degree n-i.
        const int deg = (have - 1) - j;
        by_desc[static_cast<size_t>(tp.n - deg)] = comps[static_cast<size_t>(j)];
    }

    DensityOperator out(delta.dim());
    for (int i = 0; i <= tp.n; ++i) {
        const DensityOperator& comp = by_desc[static_cast<size_t>(i)];
        if (comp.is_zero()) continue;
        LambdaPoly pw(tp.rows[static_cast<size_t>(i)]);
        pw *= Rational(1) / at_lam[static_cast<size_t>(i)];
        out += mul_wpoly(pw, dlo_pencil(comp, tp.lam, table));
    }
    return out;
}

struct SelfAdjointnessCertificate {
    bool self_adjoint = false;
    /// Row-by-row coefficients of P_i re-expanded in powers of (w - 1/2).
    std::vector<std::vector<Rational>> centered;
    /// First row whose parity fails, when not self-adjoint.
    std::optional<int> first_violating_row;
};

/// A triangular family is self-adjoint exactly when every row satisfies
/// P_i(1 - w) = (-1)^i P_i(w); equivalently the expansion of P_i around 1/2
/// contains only powers of (w - 1/2) with the parity of i. The certificate
/// carries those centered expansions.
inline SelfAdjointnessCertificate self_adjointness_filter(
    const std::vector<std::vector<Rational>>& rows) {
    detail::validate_triangular_rows(static_cast<int>(rows.size()) - 1, rows);
    SelfAdjointnessCertificate cert;
    cert.self_adjoint = true;
    for (size_t i = 0; i < rows.size(); ++i) {
        LambdaPoly centered = LambdaPoly(rows[i]).compose_affine(Rational(1), Rational(1, 2));
        std::vector<Rational> coeffs(i + 1, Rational(0));
        for (size_t j = 0; j <= i; ++j) coeffs[j] = centered.coeff(static_cast<unsigned>(j));
        for (size_t j = 0; j <= i; ++j)
            if (coeffs[j] != 0 && (i - j) % 2 == 1 && cert.self_adjoint) {
                cert.self_adjoint = false;
                cert.first_violating_row = static_cast<int>(i);
            }
        cert.centered.push_back(std::move(coeffs));
    }
    return cert;
}

/// The self-adjoint two-parameter family of second-order liftings, given by
/// the rows {1}, {-1, 2} (that is, 2w - 1), and p + q w (w - 1).
inline DensityOperator second_order_selfadjoint_family(const DensityOperator& delta,
                                                       const Rational& lam, const Rational& p,
                                                       const Rational& q,
                                                       const DLOCoefficientTable& table) {
    if (p == 0 && q == 0)
        throw Error(ErrorCode::ExcludedParam,
                    "second_order_selfadjoint_family: (p, q) = (0, 0) is excluded");
    if (Rational(2) * lam - 1 == 0)
        throw Error(ErrorCode::SingularWeight,
                    "second_order_selfadjoint_family: weight 1/2 is excluded");
    if (p + q * lam * (lam - 1) == 0)
        throw Error(ErrorCode::ExcludedParam,
                    "second_order_selfadjoint_family: p + q lam (lam - 1) = 0 is excluded");
    TriangularFamilyParams tp;
    tp.n = 2;
    tp.lam = lam;
    tp.rows = {{Rational(1)}, {Rational(-1), Rational(2)}, {p, -q, q}};
    return triangular_family_lift(delta, tp, table);
}

/// The scalar produced by the second-order projective cocycle: for a
/// weight-free operator of order <= 2 with zeroth coefficient F, first-order
/// coefficients A^i, and second-order symbol P2,
///   F - lam d_i A^i + (lam a_d(lam) - b_d(lam)) (1/2) Div^2 P2.
inline MultiPoly schwarzian_scalar(const DensityOperator& delta, const Rational& lam, int d) {
    if (d != delta.dim())
        throw Error(ErrorCode::Dim, "schwarzian_scalar: dimension argument " + std::to_string(d) +
                                        " does not match operator dimension " +
                                        std::to_string(delta.dim()));
    detail::require_weight_free(delta, "schwarzian_scalar");
    detail::require_order_at_most(delta, 2, "schwarzian_scalar");

    const Expo zero(static_cast<size_t>(d), 0);
    MultiPoly f = delta.coefficient(zero, 0);
    MultiPoly div_a1(d);
    for (int i = 1; i <= d; ++i) {
        Expo e(static_cast<size_t>(d), 0);
        e[static_cast<size_t>(i - 1)] = 1;
        div_a1 += delta.coefficient(e, 0).partial(i);
    }
    SymbolPoly p2 = symbol_of_order(delta, 2);
    MultiPoly half_div2 = p2.is_zero() ? MultiPoly(d) : div_series_term(p2, 2, 2).coefficient(zero);

    const Rational coef = lam * dlo_a_closed(d).eval(lam) - dlo_b_closed(d).eval(lam);
    return f - lam * div_a1 + coef * half_div2;
}

} // namespace densops
