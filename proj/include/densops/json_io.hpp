#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "densops/dlo.hpp"
#include "densops/error.hpp"
#include "densops/operators.hpp"
#include "densops/parse.hpp"
#include "densops/pencils.hpp"
#include "densops/symbols.hpp"
#include "densops/volume.hpp"

namespace densops {

using nlohmann::json;

namespace json_detail {

inline const json& need(const json& j, const char* key, const char* what) {
    if (!j.is_object() || !j.contains(key))
        throw Error(ErrorCode::Parse, std::string(what) + ": missing key \"" + key + "\"");
    return j.at(key);
}

inline int need_int(const json& j, const char* key, const char* what) {
    const json& v = need(j, key, what);
    if (!v.is_number_integer())
        throw Error(ErrorCode::Parse, std::string(what) + ": \"" + key + "\" must be an integer");
    return v.get<int>();
}

inline std::string need_str(const json& j, const char* key, const char* what) {
    const json& v = need(j, key, what);
    if (!v.is_string())
        throw Error(ErrorCode::Parse, std::string(what) + ": \"" + key + "\" must be a string");
    return v.get<std::string>();
}

inline Rational need_rational(const json& j, const char* key, const char* what) {
    return parse_rational(need_str(j, key, what));
}

inline int check_dim(int dim, std::optional<int> expect, const char* what) {
    if (dim < 0) throw Error(ErrorCode::Parse, std::string(what) + ": negative dimension");
    if (expect && dim != *expect)
        throw Error(ErrorCode::Dim, std::string(what) + ": file dimension " + std::to_string(dim) +
                                        " does not match requested dimension " +
                                        std::to_string(*expect));
    return dim;
}

inline Expo expo_from_json(const json& v, int dim, const char* key, const char* what) {
    if (!v.is_array() || v.size() != static_cast<size_t>(dim))
        throw Error(ErrorCode::Parse, std::string(what) + ": \"" + key + "\" must be an array of " +
                                          std::to_string(dim) + " integers");
    Expo e;
    e.reserve(v.size());
    for (const auto& x : v) {
        if (!x.is_number_integer() || x.get<long long>() < 0 || x.get<long long>() > 512)
            throw Error(ErrorCode::Parse,
                        std::string(what) + ": \"" + key + "\" entries must be integers in 0..512");
        e.push_back(static_cast<unsigned>(x.get<long long>()));
    }
    return e;
}

} // namespace json_detail

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

inline json op_to_json(const DensityOperator& a) {
    json terms = json::array();
    for (const auto& [k, c] : a.terms()) {
        json t;
        t["alpha"] = k.alpha;
        t["coeff"] = c.str();
        t["w"] = k.wpow;
        terms.push_back(std::move(t));
    }
    return json{{"dim", a.dim()}, {"terms", std::move(terms)}};
}

inline DensityOperator op_from_json(const json& j, std::optional<int> expect_dim = std::nullopt) {
    const char* what = "operator";
    int dim = json_detail::check_dim(json_detail::need_int(j, "dim", what), expect_dim, what);
    const json& terms = json_detail::need(j, "terms", what);
    if (!terms.is_array()) throw Error(ErrorCode::Parse, "operator: \"terms\" must be an array");
    DensityOperator a(dim);
    for (const auto& t : terms) {
        Expo alpha = json_detail::expo_from_json(json_detail::need(t, "alpha", what), dim, "alpha", what);
        const json& w = json_detail::need(t, "w", what);
        if (!w.is_number_integer() || w.get<long long>() < 0 || w.get<long long>() > 64)
            throw Error(ErrorCode::Parse, "operator: \"w\" must be an integer in 0..64");
        MultiPoly c = parse_poly(json_detail::need_str(t, "coeff", what), dim);
        a.add_term(alpha, static_cast<unsigned>(w.get<long long>()), c);
    }
    return a;
}

// ---------------------------------------------------------------------------
// Symbols
// ---------------------------------------------------------------------------

inline json symbol_to_json(const SymbolPoly& s) {
    json terms = json::array();
    for (const auto& [e, c] : s.terms()) {
        json t;
        t["coeff"] = c.str();
        t["xi"] = e;
        terms.push_back(std::move(t));
    }
    return json{{"dim", s.dim()}, {"terms", std::move(terms)}};
}

inline SymbolPoly symbol_from_json(const json& j, std::optional<int> expect_dim = std::nullopt) {
    const char* what = "symbol";
    int dim = json_detail::check_dim(json_detail::need_int(j, "dim", what), expect_dim, what);
    const json& terms = json_detail::need(j, "terms", what);
    if (!terms.is_array()) throw Error(ErrorCode::Parse, "symbol: \"terms\" must be an array");
    SymbolPoly s(dim);
    for (const auto& t : terms) {
        Expo xi = json_detail::expo_from_json(json_detail::need(t, "xi", what), dim, "xi", what);
        s.add_term(xi, parse_poly(json_detail::need_str(t, "coeff", what), dim));
    }
    return s;
}

// ---------------------------------------------------------------------------
// Quasi-densities
// ---------------------------------------------------------------------------

inline json density_to_json(const QuasiDensity& q) {
    json parts = json::array();
    for (const auto& [w, s] : q.parts()) {
        json p;
        p["coeff"] = s.str();
        p["weight"] = rational_to_string(w);
        parts.push_back(std::move(p));
    }
    return json{{"dim", q.dim()}, {"parts", std::move(parts)}};
}

inline QuasiDensity density_from_json(const json& j, std::optional<int> expect_dim = std::nullopt) {
    const char* what = "density";
    int dim = json_detail::check_dim(json_detail::need_int(j, "dim", what), expect_dim, what);
    const json& parts = json_detail::need(j, "parts", what);
    if (!parts.is_array()) throw Error(ErrorCode::Parse, "density: \"parts\" must be an array");
    QuasiDensity q(dim);
    for (const auto& p : parts)
        q.add_part(json_detail::need_rational(p, "weight", what),
                   parse_poly(json_detail::need_str(p, "coeff", what), dim));
    return q;
}

// ---------------------------------------------------------------------------
// Volume structures and family parameters
// ---------------------------------------------------------------------------

inline json volume_to_json(const VolumeStructure& v) {
    json g = json::array();
    for (const auto& c : v.gamma) g.push_back(c.str());
    return json{{"dim", v.dim}, {"gamma", std::move(g)}};
}

inline VolumeStructure volume_from_json(const json& j, std::optional<int> expect_dim = std::nullopt) {
    const char* what = "volume structure";
    int dim = json_detail::check_dim(json_detail::need_int(j, "dim", what), expect_dim, what);
    const json& g = json_detail::need(j, "gamma", what);
    if (!g.is_array() || g.size() != static_cast<size_t>(dim))
        throw Error(ErrorCode::Parse,
                    "volume structure: \"gamma\" must be an array of d polynomial strings");
    std::vector<MultiPoly> gamma;
    gamma.reserve(g.size());
    for (const auto& s : g) {
        if (!s.is_string())
            throw Error(ErrorCode::Parse, "volume structure: \"gamma\" entries must be strings");
        gamma.push_back(parse_poly(s.get<std::string>(), dim));
    }
    return VolumeStructure(dim, std::move(gamma));
}

inline SdiffFamilyParams sdiff_params_from_json(const json& j, const Rational& lam) {
    const char* what = "family parameters";
    SdiffFamilyParams p;
    p.n = json_detail::need_int(j, "n", what);
    if (p.n < 0 || p.n > 16) throw Error(ErrorCode::Parse, "family parameters: n must be in 0..16");
    p.lam = lam;
    p.b = json_detail::need_rational(j, "b", what);
    for (const char* key : {"c", "d"}) {
        const json& arr = json_detail::need(j, key, what);
        if (!arr.is_array() || arr.size() != static_cast<size_t>(p.n))
            throw Error(ErrorCode::Parse, std::string("family parameters: \"") + key +
                                              "\" must be an array of n rational strings");
        auto& dst = (key[0] == 'c') ? p.c : p.d;
        for (const auto& s : arr) {
            if (!s.is_string())
                throw Error(ErrorCode::Parse,
                            std::string("family parameters: \"") + key + "\" entries must be strings");
            dst.push_back(parse_rational(s.get<std::string>()));
        }
    }
    return p;
}

inline TriangularFamilyParams triangular_params_from_json(const json& j, const Rational& lam) {
    const char* what = "triangular matrix";
    TriangularFamilyParams p;
    p.n = json_detail::need_int(j, "n", what);
    if (p.n < 0 || p.n > 16) throw Error(ErrorCode::Parse, "triangular matrix: n must be in 0..16");
    p.lam = lam;
    const json& rows = json_detail::need(j, "rows", what);
    if (!rows.is_array())
        throw Error(ErrorCode::Parse, "triangular matrix: \"rows\" must be an array of arrays");
    for (const auto& row : rows) {
        if (!row.is_array())
            throw Error(ErrorCode::Parse, "triangular matrix: \"rows\" must be an array of arrays");
        std::vector<Rational> r;
        for (const auto& s : row) {
            if (!s.is_string())
                throw Error(ErrorCode::Parse, "triangular matrix: row entries must be rational strings");
            r.push_back(parse_rational(s.get<std::string>()));
        }
        p.rows.push_back(std::move(r));
    }
    return p;
}

// ---------------------------------------------------------------------------
// Coefficient tables
// ---------------------------------------------------------------------------

inline json table_to_json(const DLOCoefficientTable& t) {
    auto dump = [](const std::vector<std::vector<LambdaPoly>>& cc) {
        json out = json::array();
        for (const auto& row : cc) {
            json jr = json::array();
            for (const auto& p : row) {
                json jp = json::array();
                for (const auto& c : p.coeffs()) jp.push_back(rational_to_string(c));
                jr.push_back(std::move(jp));
            }
            out.push_back(std::move(jr));
        }
        return out;
    };
    return json{{"c", dump(t.c)}, {"ctilde", dump(t.ctilde)}, {"dim", t.dim}, {"n", t.max_order}};
}

inline DLOCoefficientTable table_from_json(const json& j) {
    const char* what = "coefficient table";
    DLOCoefficientTable t;
    t.dim = json_detail::need_int(j, "dim", what);
    t.max_order = json_detail::need_int(j, "n", what);
    if (t.dim < 1 || t.max_order < 0)
        throw Error(ErrorCode::Table, "coefficient table: invalid dim or n");
    auto load = [&](const char* key) {
        const json& arr = json_detail::need(j, key, what);
        if (!arr.is_array() || arr.size() != static_cast<size_t>(t.max_order) + 1)
            throw Error(ErrorCode::Table,
                        std::string("coefficient table: \"") + key + "\" must have n+1 rows");
        std::vector<std::vector<LambdaPoly>> cc;
        for (size_t k = 0; k < arr.size(); ++k) {
            const json& row = arr[k];
            if (!row.is_array() || row.size() != k + 1)
                throw Error(ErrorCode::Table, std::string("coefficient table: \"") + key + "\" row " +
                                                  std::to_string(k) + " must have k+1 entries");
            std::vector<LambdaPoly> r;
            for (const auto& jp : row) {
                if (!jp.is_array())
                    throw Error(ErrorCode::Table,
                                "coefficient table: entries must be arrays of rational strings");
                std::vector<Rational> coeffs;
                for (const auto& s : jp) {
                    if (!s.is_string())
                        throw Error(ErrorCode::Table,
                                    "coefficient table: coefficients must be rational strings");
                    coeffs.push_back(parse_rational(s.get<std::string>()));
                }
                r.emplace_back(std::move(coeffs));
            }
            cc.push_back(std::move(r));
        }
        return cc;
    };
    t.c = load("c");
    t.ctilde = load("ctilde");
    const LambdaPoly one(Rational(1));
    for (int k = 0; k <= t.max_order; ++k)
        if (t.c[static_cast<size_t>(k)][0] != one || t.ctilde[static_cast<size_t>(k)][0] != one)
            throw Error(ErrorCode::Table, "coefficient table: leading coefficients must equal 1");
    return t;
}

} // namespace densops
