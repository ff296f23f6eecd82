#include "poincare/poincare.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <string>

using namespace poincare;

namespace {

json minimal_config() {
    return json::parse(R"({
        "dimension": 1,
        "grid_sizes": [32],
        "p_values": [2],
        "weights": [{"type": "constant"}],
        "checks": ["theorem"],
        "suite": {"seed": 7, "count": 5, "families": ["random"]}
    })");
}

std::string config_error(const json& j) {
    try {
        parse_config(j);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::string csv_text(const Table& t) {
    std::ostringstream os;
    write_csv(os, t);
    return os.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("poincare_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST(Config, MinimalParses) {
    const auto c = parse_config(minimal_config());
    EXPECT_EQ(c.dimension, 1);
    EXPECT_EQ(c.grid_sizes, std::vector<int>{32});
    EXPECT_EQ(c.suite.seed, 7u);
    ASSERT_EQ(c.weights.size(), 1u);
    EXPECT_TRUE(c.weights[0].profile.is_constant());
}

TEST(Config, FractionalOrderOutOfRange) {
    auto j = minimal_config();
    j["kernels"] = json::parse(R"([{"kind": "fractional", "s": 1.0}])");
    const auto msg = config_error(j);
    EXPECT_NE(msg.find("kernels[0].s"), std::string::npos) << msg;
    EXPECT_NE(msg.find("s must lie in (0,1)"), std::string::npos) << msg;

    j = minimal_config();
    j["sweep"] = json::parse(R"({"s": [0.5, 0.0]})");
    EXPECT_NE(config_error(j).find("sweep.s[1]"), std::string::npos);
}

TEST(Config, RejectsEmptyGridList) {
    auto j = minimal_config();
    j["grid_sizes"] = json::array();
    EXPECT_NE(config_error(j).find("grid_sizes"), std::string::npos);
}

TEST(Config, SeedIsMandatory) {
    auto j = minimal_config();
    j["suite"].erase("seed");
    EXPECT_NE(config_error(j).find("suite.seed"), std::string::npos);
}

TEST(Config, FieldPathsInErrors) {
    auto j = minimal_config();
    j["weights"] = json::parse(R"([{"type": "constant"}, {"type": "step", "breakpoints": [0.4], "values": [1, 0]}])");
    EXPECT_EQ(config_error(j).rfind("weights[1]", 0), 0u) << config_error(j);
    j = minimal_config();
    j["checks"] = json::parse(R"(["theorem", "bogus"])");
    EXPECT_NE(config_error(j).find("checks[1]"), std::string::npos);
    j = minimal_config();
    j["grid_sizes"] = json::parse("[32, 7]");
    EXPECT_NE(config_error(j).find("grid_sizes[1]"), std::string::npos);
    j = minimal_config();
    j["typo"] = 1;
    EXPECT_NE(config_error(j).find("typo"), std::string::npos);
    EXPECT_THROW(parse_config_text("{not json"), ConfigError);
}

TEST(Config, PowerWeightIsSampled) {
    auto j = minimal_config();
    j["profile_steps"] = 4;
    j["weights"] = json::parse(R"([{"type": "power", "beta": 2}])");
    const auto c = parse_config(j);
    EXPECT_EQ(c.weights[0].profile.values().size(), 4u);
    EXPECT_DOUBLE_EQ(c.weights[0].profile.at_center(), 1.0);
}

TEST(Config, SchemaListsRequiredFields) {
    const auto s = config_schema();
    EXPECT_EQ(s["required"], json::parse(R"(["dimension", "grid_sizes", "p_values", "suite"])"));
    EXPECT_TRUE(s["properties"].contains("kernels"));
}

TEST(Suite, SeededAndDeterministic) {
    const auto g = build_grid(2, 16);
    const std::vector<std::string> fams{"affine", "bump", "random", "eigen"};
    const auto a = make_suite(g, 11, 8, fams);
    const auto b = make_suite(g, 11, 8, fams);
    const auto c = make_suite(g, 12, 8, fams);
    ASSERT_EQ(a.size(), 8u);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].u.values(), b[i].u.values());
    EXPECT_NE(a[0].u.values(), c[0].u.values());
    EXPECT_EQ(a[5].label, "bump#5");
    // repeated eigen entries are perturbed, not copies
    EXPECT_NE(a[3].u.values(), a[7].u.values());
    EXPECT_THROW(make_suite(g, 1, 1, {"nope"}), std::invalid_argument);
}

TEST(Suite, AffineIsExactlyAffine) {
    const auto g = build_grid(1, 16);
    const auto s = make_suite(g, 3, 1, {"affine"});
    const auto& v = s[0].u.values();
    for (std::size_t i = 2; i < v.size(); ++i) EXPECT_NEAR(v[i] - v[i - 1], v[1] - v[0], 1e-12);
}

TEST(Report, CsvFormatting) {
    EXPECT_EQ(detail::csv_field(Cell(0.1)), "0.1");
    EXPECT_EQ(detail::csv_field(Cell(std::monostate{})), "");
    EXPECT_EQ(detail::csv_field(Cell(std::string("a,b"))), "\"a,b\"");
    EXPECT_EQ(detail::csv_field(Cell(true)), "true");
}

TEST(Report, GridFunctionRoundTrip) {
    const auto g = build_grid(2, 8);
    const auto u = GridFunction::from(g, [](const Point& c) { return c.x * 0.1 + c.y / 3.0; });
    const auto back = grid_function_from_json(json::parse(to_json(u).dump()));
    EXPECT_EQ(back.values(), u.values());
    EXPECT_EQ(back.grid().cells_per_axis(), 8);
}

TEST(Verify, MinimalConfigFivePassingRows) {
    const auto t = run_verify(parse_config(minimal_config()));
    ASSERT_EQ(t.rows().size(), 5u);
    for (const auto& r : t.rows()) {
        EXPECT_TRUE(r.pass);
        EXPECT_EQ(std::get<std::string>(r.cells[0]), "theorem");
    }
    EXPECT_FALSE(t.any_fail());
    EXPECT_EQ(csv_text(t).substr(0, csv_text(t).find('\n')), "check_id,d,N,p,s,R,profile,lhs,rhs,ratio,constant_used,pass");
}

TEST(Verify, EmptyCheckListIsVacuous) {
    auto j = minimal_config();
    j["checks"] = json::array();
    const auto t = run_verify(parse_config(j));
    EXPECT_TRUE(t.rows().empty());
    EXPECT_FALSE(t.any_fail());
}

TEST(Verify, EveryCheckKindPasses) {
    for (int d : {1, 2}) {
        auto j = json::parse(R"({
            "grid_sizes": [8],
            "p_values": [1, 2],
            "weights": [{"type": "constant"}, {"type": "step", "breakpoints": [0.75], "values": [2, 1]}],
            "kernels": [{"kind": "fractional", "s": 0.5, "R": 2}, {"kind": "constant_floor", "c": 0.5}],
            "checks": ["theorem", "local", "nonlocal", "kernel_floor", "ckk", "shift_lemma", "chain_lemma"],
            "suite": {"seed": 3, "count": 4, "families": ["affine", "bump", "random", "eigen"]}
        })");
        j["dimension"] = d;
        const auto t = run_verify(parse_config(j));
        // per (p, weight, u): theorem, local, nonlocal, kernel_floor, ckk; plus shift and chain once per (p, u)
        EXPECT_EQ(t.rows().size(), 2u * (2u * 4u * 5u + 4u * 2u));
        for (const auto& r : t.rows())
            EXPECT_TRUE(r.pass) << std::get<std::string>(r.cells[0]) << " ratio " << detail::csv_field(r.cells[9]);
    }
}

TEST(Verify, ByteIdenticalAcrossRuns) {
    auto j = minimal_config();
    j["checks"] = json::parse(R"(["theorem", "ckk", "shift_lemma"])");
    j["kernels"] = json::parse(R"([{"kind": "fractional", "s": 0.6}])");
    j["suite"]["families"] = json::parse(R"(["bump", "random"])");
    const auto c = parse_config(j);
    EXPECT_EQ(csv_text(run_verify(c)), csv_text(run_verify(c)));
    RunOptions other;
    other.seed = 8;
    EXPECT_NE(csv_text(run_verify(c)), csv_text(run_verify(c, other)));
}

TEST(Sharp, NeumannConvergenceRows) {
    const auto c = parse_config(json::parse(R"({
        "dimension": 1,
        "grid_sizes": [64, 128, 256],
        "p_values": [2],
        "checks": ["local"],
        "suite": {"seed": 1}
    })"));
    TraceLog trace;
    RunOptions o;
    o.trace = &trace;
    const auto t = run_sharp(c, o);
    ASSERT_EQ(t.rows().size(), 3u);
    const double target = M_PI * M_PI / 4.0;
    double previous = INFINITY;
    for (const auto& r : t.rows()) {
        EXPECT_TRUE(r.pass);
        const double lambda = std::get<double>(r.cells[6]);
        EXPECT_LT(std::abs(lambda - target), previous);
        previous = std::abs(lambda - target);
        EXPECT_GE(std::get<double>(r.cells[11]), 1.0);
    }
    EXPECT_LT(previous, 1e-3);
    EXPECT_FALSE(trace.empty());
}

TEST(Sharp, GapFactorAtLeastOneForOtherExponents) {
    const auto c = parse_config(json::parse(R"({
        "dimension": 2,
        "grid_sizes": [12],
        "p_values": [1, 3],
        "weights": [{"type": "step", "breakpoints": [0.75], "values": [2, 1]}],
        "checks": ["theorem", "local"],
        "sharp": {"ascent_steps": 5},
        "suite": {"seed": 1}
    })"));
    const auto t = run_sharp(c);
    ASSERT_EQ(t.rows().size(), 4u);
    for (const auto& r : t.rows()) {
        EXPECT_TRUE(r.pass);
        EXPECT_EQ(std::get<std::string>(r.cells[5]), "ascent");
    }
}

TEST(Sharp, NonConvergenceIsAFailingRow) {
    const auto c = parse_config(json::parse(R"({
        "dimension": 1,
        "grid_sizes": [128],
        "p_values": [2],
        "checks": ["local"],
        "sharp": {"tolerance": 1e-300, "max_iterations": 2},
        "suite": {"seed": 1}
    })"));
    const auto t = run_sharp(c);
    ASSERT_EQ(t.rows().size(), 1u);
    EXPECT_FALSE(t.rows()[0].pass);
    EXPECT_TRUE(std::isfinite(std::get<double>(t.rows()[0].cells[7])));
    EXPECT_TRUE(t.any_fail());
}

TEST(Sweep, EmptyAxesGiveSinglePoint) {
    const auto c = parse_config(json::parse(R"({
        "dimension": 1,
        "grid_sizes": [32],
        "p_values": [2],
        "suite": {"seed": 2, "count": 1, "families": ["bump"]}
    })"));
    const auto t = run_sweep(c);
    ASSERT_EQ(t.rows().size(), 1u);
    EXPECT_TRUE(t.rows()[0].pass);
    EXPECT_DOUBLE_EQ(std::get<double>(t.rows()[0].cells[11]), 1.0);
}

TEST(Sweep, ChainRatioBoundedOverR) {
    const auto c = parse_config(json::parse(R"({
        "dimension": 1,
        "grid_sizes": [64],
        "p_values": [2],
        "sweep": {"s": [0.5], "R": [1, 2, 4, 8]},
        "suite": {"seed": 2, "count": 2, "families": ["bump", "random"]}
    })"));
    const auto t = run_sweep(c);
    ASSERT_EQ(t.rows().size(), 8u);
    for (const auto& r : t.rows()) {
        EXPECT_LE(std::get<double>(r.cells[13]), 1.0);
        EXPECT_TRUE(r.pass);
    }
}

#ifdef POINCARE_CLI_PATH
namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + POINCARE_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST(Cli, VerifyWritesReports) {
    const auto dir = scratch_dir("cli_verify");
    std::ofstream(dir / "config.json") << minimal_config().dump();
    EXPECT_EQ(run_cli("verify --config " + (dir / "config.json").string() + " --out " + (dir / "out").string()), 0);
    EXPECT_TRUE(std::filesystem::exists(dir / "out" / "verify.csv"));
    std::ifstream js(dir / "out" / "verify.json");
    EXPECT_EQ(json::parse(js).size(), 5u);
}

TEST(Cli, ExitStatusReflectsFailures) {
    const auto dir = scratch_dir("cli_fail");
    auto j = minimal_config();
    j["sharp"] = json::parse(R"({"tolerance": 1e-300, "max_iterations": 2})");
    j["checks"] = json::parse(R"(["local"])");
    std::ofstream(dir / "config.json") << j.dump();
    EXPECT_NE(run_cli("sharp --config " + (dir / "config.json").string() + " --out " + dir.string()), 0);

    auto bad = minimal_config();
    bad["kernels"] = json::parse(R"([{"kind": "fractional", "s": 1.0}])");
    std::ofstream(dir / "bad.json") << bad.dump();
    EXPECT_EQ(run_cli("verify --config " + (dir / "bad.json").string() + " --out " + dir.string()), 2);
}

TEST(Cli, SchemaAndSeedOverride) {
    EXPECT_EQ(run_cli("schema"), 0);
    const auto dir = scratch_dir("cli_seed");
    std::ofstream(dir / "config.json") << minimal_config().dump();
    const auto cfg = (dir / "config.json").string();
    ASSERT_EQ(run_cli("verify --config " + cfg + " --out " + (dir / "a").string() + " --seed 99"), 0);
    ASSERT_EQ(run_cli("verify --config " + cfg + " --out " + (dir / "b").string()), 0);
    auto read = [](const std::filesystem::path& p) {
        std::ifstream in(p);
        return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    };
    EXPECT_NE(read(dir / "a" / "verify.csv"), read(dir / "b" / "verify.csv"));
}
#endif
