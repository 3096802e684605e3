#include "support.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace densops;
using namespace densops::testing;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    out += "'";
    return out;
}

} // namespace

TEST_CASE("operator grammar essentials") {
    // Composition is non-commutative: d1 * x1 picks up the Leibniz term.
    DensityOperator want(1);
    want.add_term({1}, 0, poly("x1", 1));
    want.add_term({0}, 0, poly("1", 1));
    require_op_eq(op("d1*x1", 1), want);
    require_op_eq(op("d1 x1", 1), want); // juxtaposition composes
    require_op_eq(op("d1*x1 - x1*d1", 1), op("1", 1));

    // The introductory pencil operator (w^2 + 1) d^2 + d.
    DensityOperator intro(1);
    intro.add_term({2}, 2, poly("1", 1));
    intro.add_term({2}, 0, poly("1", 1));
    intro.add_term({1}, 0, poly("1", 1));
    require_op_eq(op("(w^2+1)*d1*d1 + d1", 1), intro);
    require_op_eq(op("(w^2+1)*d1^2 + d1", 1), intro);

    // Precedence: ^ binds before *, unary minus distributes over a factor.
    require_op_eq(op("2*d1^2", 1), op("2*(d1*d1)", 1));
    require_op_eq(op("-d1^2 + d1", 1), op("d1 - d1*d1", 1));

    // Index out of range and malformed input carry positions.
    try {
        op("d2", 1);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Parse);
        CHECK(std::string(e.what()).find("d2") != std::string::npos);
    }
    try {
        op("d1 + + d1", 1);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Parse);
        CHECK(std::string(e.what()).find("column") != std::string::npos);
    }
    CHECK_THROWS_AS(op("(d1", 1), Error);
    CHECK_THROWS_AS(op("(d1 + w)^2", 1), Error);
    CHECK_THROWS_AS(op("", 1), Error);
}

TEST_CASE("printing an operator reparses to the same operator") {
    require_op_eq(op(op_to_string(DensityOperator(2)), 2), DensityOperator(2));

    RandomGen rng(601);
    for (int t = 0; t < 100; ++t) {
        int d = rng.uniform_int(1, 3);
        DensityOperator a = rng.general_op(d, 3, 2, 2);
        std::string printed = op_to_string(a);
        INFO("printed: " << printed);
        DensityOperator reparsed = op(printed, d);
        require_op_eq(reparsed, a);
        // parse . print . parse = parse, stated on the string level too.
        CHECK(op_to_string(reparsed) == printed);
    }
}

TEST_CASE("JSON serialization round-trips") {
    RandomGen rng(602);
    for (int t = 0; t < 20; ++t) {
        int d = rng.uniform_int(1, 3);
        DensityOperator a = rng.general_op(d, 3, 2, 2);
        require_op_eq(op_from_json(op_to_json(a)), a);

        SymbolPoly s = rng.symbol(d, 3);
        CHECK(symbol_from_json(symbol_to_json(s)) == s);

        QuasiDensity q = rng.quasidensity(d, 2);
        CHECK(density_from_json(density_to_json(q)) == q);

        VolumeStructure vol = rng.flat_volume(d, 2);
        VolumeStructure back = volume_from_json(volume_to_json(vol));
        CHECK(back.dim == vol.dim);
        CHECK(back.gamma == vol.gamma);
    }

    const DLOCoefficientTable& t1 = table(1, 2);
    DLOCoefficientTable back = table_from_json(table_to_json(t1));
    CHECK(back.dim == t1.dim);
    CHECK(back.max_order == t1.max_order);
    CHECK(back.c == t1.c);
    CHECK(back.ctilde == t1.ctilde);

    // Dimension guards fire on mismatched expectations.
    CHECK_THROWS_AS(op_from_json(op_to_json(op("d1", 1)), 2), Error);
}

TEST_CASE("parser survives fuzzed input") {
    // Every malformed input must surface as a structured error, never as a
    // crash or a foreign exception type.
    const std::string alphabet = "xdw123+-*^()/ .";
    std::mt19937_64 rng(0xf00dULL);
    std::uniform_int_distribution<size_t> pick(0, alphabet.size() - 1);
    std::uniform_int_distribution<int> len(0, 40);
    int parsed = 0;
    for (int t = 0; t < 2000; ++t) {
        std::string s;
        int n = len(rng);
        for (int i = 0; i < n; ++i) s += alphabet[pick(rng)];
        try {
            parse_operator(s, 2);
            ++parsed;
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::Parse);
        }
    }
    // A sanity floor: some fuzz strings are valid expressions.
    CHECK(parsed > 0);
}

TEST_CASE("command-line golden outputs are byte-stable") {
    const char* cli = std::getenv("DENSOPS_CLI");
    const char* golden = std::getenv("DENSOPS_GOLDEN_DIR");
    if (cli == nullptr || golden == nullptr)
        SKIP("DENSOPS_CLI / DENSOPS_GOLDEN_DIR not set (run under ctest)");

    std::vector<std::filesystem::path> cases;
    for (const auto& entry : std::filesystem::directory_iterator(golden))
        if (entry.path().extension() == ".json") cases.push_back(entry.path());
    std::sort(cases.begin(), cases.end());
    REQUIRE(cases.size() >= 10);

    const std::string out_file = "cli_io_stdout.tmp";
    const std::string err_file = "cli_io_stderr.tmp";
    for (const auto& path : cases) {
        nlohmann::json record = nlohmann::json::parse(slurp(path));
        // The cache env var must not leak into reference runs.
        std::string cmd = "env -u DENSOPS_TABLE_CACHE " + shell_quote(cli);
        for (const auto& arg : record["args"]) cmd += " " + shell_quote(arg.get<std::string>());
        cmd += " > " + out_file + " 2> " + err_file;

        int rc = std::system(cmd.c_str());
        REQUIRE(rc != -1);
        int exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;

        INFO("golden case " << path.filename().string());
        CHECK(exit_code == record["exit"].get<int>());
        CHECK(slurp(out_file) == record["stdout"].get<std::string>());
        CHECK(slurp(err_file) == record["stderr"].get<std::string>());
    }
    std::filesystem::remove(out_file);
    std::filesystem::remove(err_file);
}
