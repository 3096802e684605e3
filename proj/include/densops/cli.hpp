#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "densops/dlo.hpp"
#include "densops/error.hpp"
#include "densops/json_io.hpp"
#include "densops/operators.hpp"
#include "densops/parse.hpp"
#include "densops/pencils.hpp"
#include "densops/random_gen.hpp"
#include "densops/volume.hpp"

namespace densops::cli {

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Parse, "cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json parse_json_text(const std::string& text, const std::string& what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::Parse, what + ": invalid JSON");
    return j;
}

/// Loads an operator from exactly one of an inline expression or a JSON file.
inline DensityOperator load_operator(const std::string& inline_src, const std::string& file,
                                     int d, const std::string& flag) {
    if (!inline_src.empty() && !file.empty())
        throw Error(ErrorCode::Parse, "give only one of --" + flag + " and --" + flag + "-file");
    if (!inline_src.empty()) return parse_operator(inline_src, d);
    if (!file.empty())
        return op_from_json(parse_json_text(read_file(file), "operator file"), d);
    throw Error(ErrorCode::Parse, "missing operator: give --" + flag + " or --" + flag + "-file");
}

/// Table provider with an in-process memo and an optional on-disk cache
/// controlled by DENSOPS_TABLE_CACHE.
inline const DLOCoefficientTable& obtain_table(int d, int n) {
    static std::map<std::pair<int, int>, DLOCoefficientTable> memo;
    auto it = memo.find({d, n});
    if (it != memo.end()) return it->second;

    const char* dir = std::getenv("DENSOPS_TABLE_CACHE");
    if (dir != nullptr && *dir != '\0') {
        namespace fs = std::filesystem;
        fs::path file = fs::path(dir) / ("dlo_table_d" + std::to_string(d) + "_n" +
                                         std::to_string(n) + ".json");
        std::error_code ec;
        if (fs::exists(file, ec)) {
            DLOCoefficientTable t = table_from_json(
                parse_json_text(read_file(file.string()), "table cache"));
            if (t.dim != d || t.max_order != n)
                throw Error(ErrorCode::Table, "table cache file " + file.string() +
                                                  " does not match its name");
            return memo.emplace(std::make_pair(d, n), std::move(t)).first->second;
        }
        DLOCoefficientTable t = solve_dlo_table(d, n);
        fs::create_directories(fs::path(dir), ec);
        std::ofstream out(file);
        if (out) out << table_to_json(t).dump() << "\n";
        else std::cerr << "warning: could not write table cache " << file.string() << "\n";
        return memo.emplace(std::make_pair(d, n), std::move(t)).first->second;
    }
    return memo.emplace(std::make_pair(d, n), solve_dlo_table(d, n)).first->second;
}

/// Everything a lifting method might need, bundled for reuse between the
/// lift verb and the property checker.
struct MethodArgs {
    std::string method;
    int d = 1;
    std::string p_text, q_text, mu_text;
    std::string gamma_file, params_file, matrix_file;
    int n = -1; // -1: derive from the operator

    Rational p() const { return parse_rational(require(p_text, "--p")); }
    Rational q() const { return parse_rational(require(q_text, "--q")); }
    Rational mu() const { return parse_rational(require(mu_text, "--mu")); }

    static const std::string& require(const std::string& v, const char* flag) {
        if (v.empty())
            throw Error(ErrorCode::Parse, std::string("this method requires ") + flag);
        return v;
    }

    VolumeStructure volume() const {
        if (gamma_file.empty())
            throw Error(ErrorCode::Parse, "this method requires --gamma-file");
        return volume_from_json(parse_json_text(read_file(gamma_file), "volume file"), d);
    }

    int effective_n(const DensityOperator& op) const {
        return n >= 0 ? n : std::max(0, op.spatial_order());
    }
};

/// Dispatches a lifting method by name. Unknown names are parse errors.
inline DensityOperator apply_lift(const MethodArgs& ma, const DensityOperator& op,
                                  const Rational& lam) {
    const std::string& m = ma.method;
    if (m == "first-order") return first_order_pencil(op, lam, ma.p(), ma.q());
    if (m == "canonical2") return canonical_second_order_lift(op, lam);
    if (m == "iso") return duval_ovsienko_iso(op, lam, ma.mu());
    if (m == "volume") return volume_lift(op, lam, ma.volume());
    if (m == "sdiff-family") {
        if (ma.params_file.empty())
            throw Error(ErrorCode::Parse, "method sdiff-family requires --params-file");
        SdiffFamilyParams params = sdiff_params_from_json(
            parse_json_text(read_file(ma.params_file), "family parameter file"), lam);
        return sdiff_family_lift(op, params, ma.volume());
    }
    if (m == "disting") return distinguished_lift(op, ma.effective_n(op), lam, ma.volume());
    if (m == "dlo") return dlo_pencil(op, lam, obtain_table(ma.d, ma.effective_n(op)));
    if (m == "triangular") {
        if (ma.matrix_file.empty())
            throw Error(ErrorCode::Parse, "method triangular requires --matrix-file");
        TriangularFamilyParams tp = triangular_params_from_json(
            parse_json_text(read_file(ma.matrix_file), "triangular matrix file"), lam);
        return triangular_family_lift(op, tp, obtain_table(ma.d, tp.n));
    }
    if (m == "selfadj2")
        return second_order_selfadjoint_family(op, lam, ma.p(), ma.q(), obtain_table(ma.d, 2));
    throw Error(ErrorCode::Parse, "unknown lift method: " + m);
}

/// Weights a method cannot accept, so randomized checks can avoid them.
inline bool weight_admissible(const MethodArgs& ma, const Rational& lam) {
    const std::string& m = ma.method;
    if (m == "canonical2" || m == "iso")
        return lam != 0 && lam != Rational(1, 2) && lam != 1;
    if (m == "first-order") return ma.p() * lam + ma.q() != 0;
    if (m == "disting") return lam != Rational(1, 2);
    if (m == "selfadj2")
        return lam != Rational(1, 2) && ma.p() + ma.q() * lam * (lam - 1) != 0;
    if (m == "triangular") {
        TriangularFamilyParams tp = triangular_params_from_json(
            parse_json_text(read_file(MethodArgs::require(ma.matrix_file, "--matrix-file")),
                            "triangular matrix file"),
            lam);
        for (const auto& row : tp.rows)
            if (LambdaPoly(row).eval(lam) == 0) return false;
        return true;
    }
    return true; // volume, sdiff-family, dlo: polynomial in the weight
}

enum class SymmetryClass { Full, VolumePreserving, Projective };

inline SymmetryClass method_symmetry(const std::string& m) {
    if (m == "volume" || m == "sdiff-family" || m == "disting") return SymmetryClass::VolumePreserving;
    if (m == "dlo" || m == "triangular" || m == "selfadj2") return SymmetryClass::Projective;
    return SymmetryClass::Full;
}

inline void print_json(const json& j) { std::cout << j.dump() << "\n"; }

struct CheckContext {
    MethodArgs ma;
    int trials = 20;
    std::uint64_t seed = 12345;
    std::string lambda_text; // empty: randomize per trial
    int maxdeg = 2;
};

inline int report_failure(const std::string& property, int trial, json detail) {
    detail["property"] = property;
    detail["trial"] = trial;
    print_json(json{{"counterexample", std::move(detail)}, {"ok", false}});
    return 1;
}

inline int report_pass(const std::string& property, const json& extra) {
    json j = extra;
    j["ok"] = true;
    j["property"] = property;
    print_json(j);
    return 0;
}

inline int check_adjoint(const CheckContext& cc) {
    RandomGen rng(cc.seed);
    const int d = cc.ma.d;
    for (int t = 0; t < cc.trials; ++t) {
        DensityOperator a = rng.general_op(d, 3, 2, cc.maxdeg);
        DensityOperator b = rng.general_op(d, 3, 2, cc.maxdeg);
        if (!(adjoint(adjoint(a)) == a))
            return report_failure("adjoint", t, json{{"law", "involution"}, {"a", op_to_json(a)}});
        if (!(adjoint(compose(a, b)) == compose(adjoint(b), adjoint(a))))
            return report_failure("adjoint", t,
                                  json{{"law", "anti-homomorphism"},
                                       {"a", op_to_json(a)},
                                       {"b", op_to_json(b)}});
        if (!(adjoint(a + b) == adjoint(a) + adjoint(b)))
            return report_failure("adjoint", t,
                                  json{{"law", "additivity"},
                                       {"a", op_to_json(a)},
                                       {"b", op_to_json(b)}});
    }
    DensityOperator w = DensityOperator::weight_op(d);
    if (!(adjoint(w) == DensityOperator::constant(d, 1) - w))
        return report_failure("adjoint", -1, json{{"law", "weight"}});
    for (int i = 1; i <= d; ++i) {
        DensityOperator di = DensityOperator::partial_op(d, i);
        if (!(adjoint(di) == -di))
            return report_failure("adjoint", -1, json{{"law", "derivative"}, {"i", i}});
    }
    return report_pass("adjoint", json{{"trials", cc.trials}});
}

inline int check_divergence(const CheckContext& cc) {
    RandomGen rng(cc.seed);
    const int d = cc.ma.d;
    for (int t = 0; t < cc.trials; ++t) {
        HatVectorField xh(rng.field(d, cc.maxdeg + 1), rng.poly(d, cc.maxdeg + 1));
        DensityOperator as_op = xh.as_operator();
        if (!(divergence_hat(xh) == -(as_op + adjoint(as_op))))
            return report_failure("divergence", t, json{{"law", "pairing"}, {"x", op_to_json(as_op)}});
        VectorField x = rng.field(d, cc.maxdeg + 1);
        HatVectorField lifted(x, divergence(x));
        if (!divergence_hat(lifted).is_zero())
            return report_failure("divergence", t,
                                  json{{"law", "lie-lift"}, {"x", op_to_json(lie_lift(x))}});
    }
    return report_pass("divergence", json{{"trials", cc.trials}});
}

inline Rational pick_weight(const CheckContext& cc, RandomGen& rng) {
    if (!cc.lambda_text.empty()) {
        Rational lam = parse_rational(cc.lambda_text);
        if (!weight_admissible(cc.ma, lam))
            throw Error(ErrorCode::SingularWeight,
                        "weight " + cc.lambda_text + " is excluded for method " + cc.ma.method);
        return lam;
    }
    for (;;) {
        Rational lam = rng.rational(4, 3);
        if (weight_admissible(cc.ma, lam)) return lam;
    }
}

inline DensityOperator random_input_op(const CheckContext& cc, RandomGen& rng, int order) {
    if (cc.ma.method == "first-order") return rng.wfree_op(cc.ma.d, std::min(order, 1), cc.maxdeg);
    if (cc.ma.method == "canonical2" || cc.ma.method == "iso" || cc.ma.method == "selfadj2")
        return rng.wfree_op(cc.ma.d, std::min(order, 2), cc.maxdeg);
    return rng.wfree_op(cc.ma.d, order, cc.maxdeg);
}

inline int check_equivariance(const CheckContext& cc) {
    RandomGen rng(cc.seed);
    const int d = cc.ma.d;
    const int order = cc.ma.n >= 0 ? cc.ma.n : 2;
    const SymmetryClass sym = method_symmetry(cc.ma.method);

    for (int t = 0; t < cc.trials; ++t) {
        MethodArgs ma = cc.ma;
        ma.n = cc.ma.n >= 0 ? cc.ma.n : order;

        // Volume-preserving methods draw a random flat volume per trial
        // unless one was fixed on the command line.
        std::optional<VolumeStructure> vol;
        if (sym == SymmetryClass::VolumePreserving && ma.gamma_file.empty()) {
            vol = rng.flat_volume(d, cc.maxdeg);
        } else if (sym == SymmetryClass::VolumePreserving) {
            vol = ma.volume();
        }

        Rational lam = pick_weight(cc, rng);
        DensityOperator delta = random_input_op(cc, rng, order);

        std::vector<VectorField> fields;
        if (sym == SymmetryClass::Full) {
            fields.push_back(rng.field(d, 3));
        } else if (sym == SymmetryClass::VolumePreserving) {
            fields.push_back(rng.rho_divfree_field(d, cc.maxdeg + 1, *vol));
        } else {
            fields = proj_generators(d);
        }

        auto lift_with = [&](const DensityOperator& input) {
            if (vol) {
                // Re-dispatch with the trial's volume structure.
                if (ma.method == "volume") return volume_lift(input, lam, *vol);
                if (ma.method == "disting")
                    return distinguished_lift(input, ma.effective_n(input), lam, *vol);
                if (ma.method == "sdiff-family") {
                    SdiffFamilyParams params = sdiff_params_from_json(
                        parse_json_text(read_file(MethodArgs::require(ma.params_file,
                                                                      "--params-file")),
                                        "family parameter file"),
                        lam);
                    return sdiff_family_lift(input, params, *vol);
                }
            }
            return apply_lift(ma, input, lam);
        };

        DensityOperator lifted = lift_with(delta);
        for (const VectorField& k : fields) {
            DensityOperator lhs = lift_with(ad_at_weight(k, delta, lam));
            // A genuine pencil transforms with the weight kept symbolic; the
            // weight-to-weight isomorphism lands at the fixed target weight.
            DensityOperator rhs = ma.method == "iso" ? ad_at_weight(k, lifted, ma.mu())
                                                     : ad_action(k, lifted);
            if (!(lhs == rhs)) {
                json kj = json::array();
                for (const auto& c : k.comp) kj.push_back(c.str());
                return report_failure("equivariance", t,
                                      json{{"method", ma.method},
                                           {"lambda", rational_to_string(lam)},
                                           {"field", kj},
                                           {"op", op_to_json(delta)},
                                           {"lhs", op_to_json(lhs)},
                                           {"rhs", op_to_json(rhs)}});
            }
        }
    }
    return report_pass("equivariance", json{{"method", cc.ma.method}, {"trials", cc.trials}});
}

inline int check_pencil(const CheckContext& cc) {
    RandomGen rng(cc.seed);
    const int order = cc.ma.n >= 0 ? cc.ma.n : 2;
    for (int t = 0; t < cc.trials; ++t) {
        MethodArgs ma = cc.ma;
        ma.n = order;
        std::optional<VolumeStructure> vol;
        if (method_symmetry(ma.method) == SymmetryClass::VolumePreserving && ma.gamma_file.empty())
            vol = rng.flat_volume(ma.d, cc.maxdeg);
        Rational lam = pick_weight(cc, rng);
        DensityOperator delta = random_input_op(cc, rng, order);
        if (ma.method == "iso") {
            // The weight map has no symbolic weight to restrict; its
            // pass-through property is being the identity at equal weights.
            if (!(duval_ovsienko_iso(delta, lam, lam) == delta))
                return report_failure("pencil", t,
                                      json{{"method", ma.method},
                                           {"lambda", rational_to_string(lam)},
                                           {"op", op_to_json(delta)}});
            continue;
        }
        DensityOperator lifted = [&] {
            if (vol) {
                if (ma.method == "volume") return volume_lift(delta, lam, *vol);
                if (ma.method == "disting")
                    return distinguished_lift(delta, ma.effective_n(delta), lam, *vol);
                if (ma.method == "sdiff-family") {
                    SdiffFamilyParams params = sdiff_params_from_json(
                        parse_json_text(read_file(MethodArgs::require(ma.params_file,
                                                                      "--params-file")),
                                        "family parameter file"),
                        lam);
                    return sdiff_family_lift(delta, params, *vol);
                }
            }
            return apply_lift(ma, delta, lam);
        }();
        if (!(restrict_weight(lifted, lam) == delta))
            return report_failure("pencil", t,
                                  json{{"method", ma.method},
                                       {"lambda", rational_to_string(lam)},
                                       {"op", op_to_json(delta)},
                                       {"restricted", op_to_json(restrict_weight(lifted, lam))}});
    }
    return report_pass("pencil", json{{"method", cc.ma.method}, {"trials", cc.trials}});
}

inline int check_selfadjoint(const CheckContext& cc) {
    RandomGen rng(cc.seed);
    const int order = cc.ma.n >= 0 ? cc.ma.n : 2;
    for (int t = 0; t < cc.trials; ++t) {
        MethodArgs ma = cc.ma;
        ma.n = order;
        std::optional<VolumeStructure> vol;
        if (ma.method == "disting" && ma.gamma_file.empty()) vol = rng.flat_volume(ma.d, cc.maxdeg);
        Rational lam = pick_weight(cc, rng);
        DensityOperator delta = random_input_op(cc, rng, order);
        DensityOperator lifted = vol ? distinguished_lift(delta, ma.effective_n(delta), lam, *vol)
                                     : apply_lift(ma, delta, lam);
        Rational sign(1);
        if (ma.method == "disting" && order % 2 == 1) sign = -1;
        if (!(adjoint(lifted) == sign * lifted))
            return report_failure("selfadjoint", t,
                                  json{{"method", ma.method},
                                       {"lambda", rational_to_string(lam)},
                                       {"op", op_to_json(delta)},
                                       {"lift", op_to_json(lifted)}});
    }
    return report_pass("selfadjoint", json{{"method", cc.ma.method}, {"trials", cc.trials}});
}

inline int check_inverse(const CheckContext& cc) {
    RandomGen rng(cc.seed);
    const int d = cc.ma.d;
    const int order = cc.ma.n >= 0 ? cc.ma.n : 2;
    const DLOCoefficientTable& table = obtain_table(d, order);
    for (int t = 0; t < cc.trials; ++t) {
        Rational lam = cc.lambda_text.empty() ? rng.rational(4, 3) : parse_rational(cc.lambda_text);
        DensityOperator delta = rng.wfree_op(d, order, cc.maxdeg);
        if (!(quantize(full_symbol(delta, lam, table), lam, table) == delta))
            return report_failure("inverse", t,
                                  json{{"direction", "quantize(symbol)"},
                                       {"lambda", rational_to_string(lam)},
                                       {"op", op_to_json(delta)}});
        SymbolPoly s = rng.symbol(d, order);
        if (!(full_symbol(quantize(s, lam, table), lam, table) == s))
            return report_failure("inverse", t,
                                  json{{"direction", "symbol(quantize)"},
                                       {"lambda", rational_to_string(lam)},
                                       {"symbol", symbol_to_json(s)}});
    }
    return report_pass("inverse", json{{"trials", cc.trials}});
}

} // namespace detail

/// Entry point of the command-line tool; returns the process exit code.
/// Results go to stdout; errors are reported as one JSON document on stderr
/// with exit code 2 (1 for a failed check, 3 for internal faults).
inline int run(int argc, const char* const* argv) {
    using namespace detail;
    try {
        CLI::App app{"exact differential operators on densities"};
        app.require_subcommand(1);

        // Common storage; each subcommand binds only the flags it supports.
        int d = 1;
        std::string a_text, a_file, b_text, b_file, op_text, op_file;
        std::string lambda_text, mu_text, p_text, q_text;
        std::string density_text, density_file, symbol_text, symbol_file;
        std::string method, gamma_file, params_file, matrix_file;
        std::string property;
        int n = -1;
        int trials = 20;
        std::uint64_t seed = 12345;
        bool verify_table = false;

        auto add_d = [&](CLI::App* c) {
            c->add_option("--d", d, "dimension of the base space")->required();
        };

        CLI::App* c_compose = app.add_subcommand("compose", "compose two operators (a after b)");
        add_d(c_compose);
        c_compose->add_option("--a", a_text, "left operator expression");
        c_compose->add_option("--a-file", a_file, "left operator JSON file");
        c_compose->add_option("--b", b_text, "right operator expression");
        c_compose->add_option("--b-file", b_file, "right operator JSON file");

        CLI::App* c_adjoint = app.add_subcommand("adjoint", "formal adjoint of an operator");
        add_d(c_adjoint);
        c_adjoint->add_option("--op", op_text, "operator expression");
        c_adjoint->add_option("--op-file", op_file, "operator JSON file");

        CLI::App* c_restrict = app.add_subcommand("restrict", "substitute a numeric weight");
        add_d(c_restrict);
        c_restrict->add_option("--op", op_text, "operator expression");
        c_restrict->add_option("--op-file", op_file, "operator JSON file");
        c_restrict->add_option("--lambda", lambda_text, "weight value")->required();

        CLI::App* c_apply = app.add_subcommand("apply", "apply an operator to a quasi-density");
        add_d(c_apply);
        c_apply->add_option("--op", op_text, "operator expression");
        c_apply->add_option("--op-file", op_file, "operator JSON file");
        c_apply->add_option("--density", density_text, "quasi-density JSON text");
        c_apply->add_option("--density-file", density_file, "quasi-density JSON file");

        CLI::App* c_lift = app.add_subcommand("lift", "lift an operator to a pencil");
        add_d(c_lift);
        c_lift->add_option("--op", op_text, "operator expression");
        c_lift->add_option("--op-file", op_file, "operator JSON file");
        c_lift->add_option("--lambda", lambda_text, "source weight")->required();
        c_lift->add_option("--method", method, "lifting method")->required();
        c_lift->add_option("--p", p_text, "pencil parameter p");
        c_lift->add_option("--q", q_text, "pencil parameter q");
        c_lift->add_option("--mu", mu_text, "target weight (method iso)");
        c_lift->add_option("--n", n, "order bound (methods dlo, disting)");
        c_lift->add_option("--gamma-file", gamma_file, "volume structure JSON file");
        c_lift->add_option("--params-file", params_file, "family parameter JSON file");
        c_lift->add_option("--matrix-file", matrix_file, "triangular matrix JSON file");

        CLI::App* c_decompose = app.add_subcommand("decompose", "graded decomposition");
        add_d(c_decompose);
        c_decompose->add_option("--op", op_text, "operator expression");
        c_decompose->add_option("--op-file", op_file, "operator JSON file");
        c_decompose->add_option("--lambda", lambda_text, "weight")->required();
        c_decompose->add_option("--n", n, "table order (default: operator order)");

        CLI::App* c_symbol = app.add_subcommand("symbol", "projectively equivariant full symbol");
        add_d(c_symbol);
        c_symbol->add_option("--op", op_text, "operator expression");
        c_symbol->add_option("--op-file", op_file, "operator JSON file");
        c_symbol->add_option("--lambda", lambda_text, "weight")->required();
        c_symbol->add_option("--n", n, "table order (default: operator order)");

        CLI::App* c_quantize = app.add_subcommand("quantize", "quantize a symbol at a weight");
        add_d(c_quantize);
        c_quantize->add_option("--symbol", symbol_text, "symbol JSON text");
        c_quantize->add_option("--symbol-file", symbol_file, "symbol JSON file");
        c_quantize->add_option("--mu", mu_text, "weight")->required();
        c_quantize->add_option("--n", n, "table order (default: symbol degree)");

        CLI::App* c_check = app.add_subcommand("check", "randomized property checks");
        c_check->add_option("property", property,
                            "one of: adjoint, divergence, equivariance, pencil, selfadjoint, inverse")
            ->required();
        add_d(c_check);
        c_check->add_option("--n", n, "operator order for the trials");
        c_check->add_option("--trials", trials, "number of randomized trials");
        c_check->add_option("--seed", seed, "random seed");
        c_check->add_option("--lambda", lambda_text, "fix the weight instead of randomizing");
        c_check->add_option("--method", method, "lifting method under test");
        c_check->add_option("--p", p_text, "pencil parameter p");
        c_check->add_option("--q", q_text, "pencil parameter q");
        c_check->add_option("--mu", mu_text, "target weight (method iso)");
        c_check->add_option("--gamma-file", gamma_file, "fixed volume structure JSON file");
        c_check->add_option("--params-file", params_file, "family parameter JSON file");
        c_check->add_option("--matrix-file", matrix_file, "triangular matrix JSON file");

        CLI::App* c_schwarzian = app.add_subcommand("schwarzian",
                                                    "projective cocycle scalar of a second-order operator");
        add_d(c_schwarzian);
        c_schwarzian->add_option("--op", op_text, "operator expression");
        c_schwarzian->add_option("--op-file", op_file, "operator JSON file");
        c_schwarzian->add_option("--lambda", lambda_text, "weight")->required();

        CLI::App* c_table = app.add_subcommand("table", "solve or verify a coefficient table");
        add_d(c_table);
        c_table->add_option("--n", n, "maximal operator order")->required();
        c_table->add_flag("--verify-table", verify_table,
                          "recompute and compare against the cached table");

        try {
            app.parse(argc, argv);
        } catch (const CLI::CallForHelp& e) {
            return app.exit(e);
        } catch (const CLI::ParseError& e) {
            throw Error(ErrorCode::Parse, std::string("command line: ") + e.what());
        }

        if (app.got_subcommand(c_compose)) {
            DensityOperator a = load_operator(a_text, a_file, d, "a");
            DensityOperator b = load_operator(b_text, b_file, d, "b");
            print_json(op_to_json(compose(a, b)));
            return 0;
        }
        if (app.got_subcommand(c_adjoint)) {
            print_json(op_to_json(adjoint(load_operator(op_text, op_file, d, "op"))));
            return 0;
        }
        if (app.got_subcommand(c_restrict)) {
            DensityOperator a = load_operator(op_text, op_file, d, "op");
            print_json(op_to_json(restrict_weight(a, parse_rational(lambda_text))));
            return 0;
        }
        if (app.got_subcommand(c_apply)) {
            DensityOperator a = load_operator(op_text, op_file, d, "op");
            QuasiDensity q(d);
            if (!density_text.empty())
                q = density_from_json(parse_json_text(density_text, "density"), d);
            else if (!density_file.empty())
                q = density_from_json(parse_json_text(read_file(density_file), "density file"), d);
            else
                throw Error(ErrorCode::Parse, "missing density: give --density or --density-file");
            print_json(density_to_json(apply(a, q)));
            return 0;
        }
        if (app.got_subcommand(c_lift)) {
            MethodArgs ma{method, d, p_text, q_text, mu_text, gamma_file, params_file, matrix_file, n};
            DensityOperator a = load_operator(op_text, op_file, d, "op");
            print_json(op_to_json(apply_lift(ma, a, parse_rational(lambda_text))));
            return 0;
        }
        if (app.got_subcommand(c_decompose)) {
            DensityOperator a = load_operator(op_text, op_file, d, "op");
            const int order = n >= 0 ? n : std::max(0, a.spatial_order());
            auto comps = graded_decompose(a, parse_rational(lambda_text), obtain_table(d, order));
            json out = json::array();
            for (const auto& c : comps) out.push_back(op_to_json(c));
            print_json(json{{"components", std::move(out)}, {"dim", d}});
            return 0;
        }
        if (app.got_subcommand(c_symbol)) {
            DensityOperator a = load_operator(op_text, op_file, d, "op");
            const int order = n >= 0 ? n : std::max(0, a.spatial_order());
            print_json(symbol_to_json(full_symbol(a, parse_rational(lambda_text),
                                                  obtain_table(d, order))));
            return 0;
        }
        if (app.got_subcommand(c_quantize)) {
            json js;
            if (!symbol_text.empty()) js = parse_json_text(symbol_text, "symbol");
            else if (!symbol_file.empty()) js = parse_json_text(read_file(symbol_file), "symbol file");
            else throw Error(ErrorCode::Parse, "missing symbol: give --symbol or --symbol-file");
            SymbolPoly s = symbol_from_json(js, d);
            const int order = n >= 0 ? n : std::max(0, s.degree());
            print_json(op_to_json(quantize(s, parse_rational(mu_text), obtain_table(d, order))));
            return 0;
        }
        if (app.got_subcommand(c_check)) {
            CheckContext cc;
            cc.ma = MethodArgs{method, d, p_text, q_text, mu_text, gamma_file, params_file,
                               matrix_file, n};
            cc.trials = trials;
            cc.seed = seed;
            cc.lambda_text = lambda_text;
            if (property == "adjoint") return check_adjoint(cc);
            if (property == "divergence") return check_divergence(cc);
            if (property == "equivariance") {
                if (method.empty()) throw Error(ErrorCode::Parse, "check equivariance requires --method");
                return check_equivariance(cc);
            }
            if (property == "pencil") {
                if (method.empty()) throw Error(ErrorCode::Parse, "check pencil requires --method");
                return check_pencil(cc);
            }
            if (property == "selfadjoint") {
                if (method.empty()) throw Error(ErrorCode::Parse, "check selfadjoint requires --method");
                return check_selfadjoint(cc);
            }
            if (property == "inverse") return check_inverse(cc);
            throw Error(ErrorCode::Parse, "unknown property: " + property);
        }
        if (app.got_subcommand(c_schwarzian)) {
            DensityOperator a = load_operator(op_text, op_file, d, "op");
            MultiPoly s = schwarzian_scalar(a, parse_rational(lambda_text), d);
            print_json(json{{"dim", d}, {"scalar", s.str()}});
            return 0;
        }
        if (app.got_subcommand(c_table)) {
            if (verify_table) {
                const char* dir = std::getenv("DENSOPS_TABLE_CACHE");
                if (dir == nullptr || *dir == '\0')
                    throw Error(ErrorCode::Table, "--verify-table requires DENSOPS_TABLE_CACHE");
                namespace fs = std::filesystem;
                fs::path file = fs::path(dir) / ("dlo_table_d" + std::to_string(d) + "_n" +
                                                 std::to_string(n) + ".json");
                std::error_code ec;
                if (!fs::exists(file, ec))
                    throw Error(ErrorCode::Table, "no cached table to verify at " + file.string());
                DLOCoefficientTable cached = table_from_json(
                    parse_json_text(read_file(file.string()), "table cache"));
                DLOCoefficientTable fresh = solve_dlo_table(d, n);
                if (cached.dim != fresh.dim || cached.max_order != fresh.max_order ||
                    cached.c != fresh.c || cached.ctilde != fresh.ctilde)
                    throw Error(ErrorCode::Table,
                                "cached table at " + file.string() + " disagrees with a fresh solve");
                print_json(json{{"dim", d}, {"n", n}, {"verified", true}});
                return 0;
            }
            print_json(table_to_json(obtain_table(d, n)));
            return 0;
        }
        throw Error(ErrorCode::Parse, "no subcommand given");
    } catch (const Error& e) {
        std::cerr << json{{"error", {{"code", e.code_name()}, {"message", e.what()}}}}.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", {{"code", "E_INTERNAL"}, {"message", e.what()}}}}.dump() << "\n";
        return 3;
    }
}

} // namespace densops::cli
