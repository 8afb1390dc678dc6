#include <qkelly/cli.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

using namespace qkelly;
using nlohmann::ordered_json;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run_cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "qkelly");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string& name, const std::string& body)
{
    auto path = std::filesystem::temp_directory_path() / ("qkelly_test_" + name);
    std::ofstream(path) << body;
    return path;
}

// Structural equality with numbers compared to a relative tolerance.
void expect_json_near(const ordered_json& got, const ordered_json& want, const std::string& where)
{
    if (want.is_number() && got.is_number()) {
        double a = got.get<double>(), b = want.get<double>();
        EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, std::abs(b))) << where;
        return;
    }
    ASSERT_EQ(got.type(), want.type()) << where;
    if (want.is_object()) {
        std::vector<std::string> gk, wk;
        for (auto it = got.begin(); it != got.end(); ++it) gk.push_back(it.key());
        for (auto it = want.begin(); it != want.end(); ++it) wk.push_back(it.key());
        ASSERT_EQ(gk, wk) << where;
        for (auto it = want.begin(); it != want.end(); ++it) expect_json_near(got[it.key()], it.value(), where + "." + it.key());
    } else if (want.is_array()) {
        ASSERT_EQ(got.size(), want.size()) << where;
        for (std::size_t i = 0; i < want.size(); ++i) expect_json_near(got[i], want[i], where + "[" + std::to_string(i) + "]");
    } else {
        EXPECT_EQ(got, want) << where;
    }
}

ordered_json golden(const std::string& name)
{
    std::ifstream in(std::string(QKELLY_GOLDEN_DIR) + "/" + name);
    return ordered_json::parse(in);
}

std::vector<std::vector<double>> csv_rows(const std::string& text)
{
    std::vector<std::vector<double>> rows;
    std::istringstream is(text);
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
        std::vector<double> row;
        for (const auto& cell : cli::split(line, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace

TEST(CliSolve, BinaryReportMatchesGolden)
{
    auto r = run_cli({"solve", "--p", "0.6,0.4", "--q", "1,1", "--n", "3", "--alpha", "1/2"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto doc = ordered_json::parse(r.out);
    EXPECT_EQ(doc["value"]["exact"], "4/27");
    EXPECT_EQ(doc["argmax"]["exact"], (ordered_json{"2/3", "1/3"}));
    EXPECT_EQ(doc["active_count"], (ordered_json{2, 1}));
    EXPECT_EQ(doc["shadow_law"], (ordered_json{"2/3", "1/3"}));
    EXPECT_NEAR(doc["kelly_value"].get<double>(), 0.6 * std::log(0.6) + 0.4 * std::log(0.4), 1e-15);
    expect_json_near(doc, golden("binary_median.json"), "binary");
}

TEST(CliSolve, TernaryReportMatchesGolden)
{
    auto r = run_cli({"solve", "--p", "0.6,0.3,0.1", "--q", "1/3,1/3,1/3", "--n", "2", "--alpha", "1/2"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto doc = ordered_json::parse(r.out);
    EXPECT_EQ(doc["value"]["exact"], "9/4");
    EXPECT_EQ(doc["argmax"]["exact"], (ordered_json{"3/2", "3/2", "0"}));
    EXPECT_EQ(doc["active_count"], (ordered_json{1, 1, 0}));
    EXPECT_EQ(doc["kelly_point"]["exact"], (ordered_json{"9/5", "9/10", "3/10"}));
    EXPECT_EQ(doc["trace"]["descent_path"], (ordered_json{"{1,2,3}[-++--+]", "{1,2}[-]", "{1,2}[0]"}));
    expect_json_near(doc, golden("ternary_median.json"), "ternary");
}

TEST(CliSolve, HighQuantileOnWall)
{
    auto r = run_cli({"solve", "--p", "0.6,0.4", "--q", "1,1", "--n", "3", "--alpha", "0.8"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto doc = ordered_json::parse(r.out);
    EXPECT_EQ(doc["value"]["decimal"].get<double>(), 0.125);
    EXPECT_EQ(doc["argmax"]["exact"], (ordered_json{"1/2", "1/2"}));
    EXPECT_EQ(doc["attained_stratum"]["label"], "{1,2}[0]");
}

TEST(CliSolve, FamilyFlagIsEchoed)
{
    auto r = run_cli({"solve", "--p", "0.6,0.4", "--q", "1,1", "--n", "3", "--alpha", "1/2", "--family", "1,0<=3/5"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto doc = ordered_json::parse(r.out);
    EXPECT_TRUE(doc.contains("family"));
    EXPECT_NEAR(doc["value"]["decimal"].get<double>(), 0.144, 1e-9);
}

TEST(CliErrors, ValidationFailuresExitTwo)
{
    auto bad_sum = run_cli({"solve", "--p", "0.6,0.5", "--q", "1,1", "--n", "3", "--alpha", "1/2"});
    EXPECT_EQ(bad_sum.code, 2);
    EXPECT_FALSE(bad_sum.err.empty());
    EXPECT_TRUE(bad_sum.out.empty());
    EXPECT_EQ(run_cli({"solve", "--p", "0.6,0.4", "--q", "1,1", "--n", "3", "--alpha", "1"}).code, 2);
    EXPECT_EQ(run_cli({"solve", "--p", "0.6,0.4", "--q", "1,1,1", "--n", "3", "--alpha", "1/2"}).code, 2);
    EXPECT_EQ(run_cli({"solve", "--bogus"}).code, 2);
    EXPECT_EQ(run_cli({}).code, 2);
    EXPECT_EQ(run_cli({"solve", "--p", "0.6,0.4", "--q", "1,1", "--n", "3", "--alpha", "1/2", "--family", "1<=2"}).code,
              2);
    EXPECT_EQ(run_cli({"verify", "--p", "0.6,0.4", "--q", "1,1", "--n", "3", "--alpha", "1/2", "--samples", "10"}).code,
              2);
}

TEST(CliSurface, BinaryRowCountAndBudget)
{
    auto r = run_cli({"surface", "--p", "0.6,0.4", "--q", "1,1", "--n", "3", "--alpha", "1/2"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "W1,W2,value");
    auto rows = csv_rows(r.out);
    EXPECT_EQ(rows.size(), 201u);
    int vertices = 0;
    for (const auto& row : rows) {
        EXPECT_NEAR(row[0] + row[1], 1.0, 1e-9);
        if (row[0] == 0 || row[1] == 0) ++vertices;
    }
    EXPECT_EQ(vertices, 2);
}

TEST(CliSurface, TernaryContainsPaperRow)
{
    auto r = run_cli({"surface", "--p", "0.6,0.3,0.1", "--q", "1/3,1/3,1/3", "--n", "2", "--alpha", "1/2", "--resolution",
                      "60"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto rows = csv_rows(r.out);
    EXPECT_EQ(rows.size(), 61u * 62u / 2);
    bool found = false;
    for (const auto& row : rows) {
        EXPECT_NEAR((row[0] + row[1] + row[2]) / 3, 1.0, 1e-9);
        if (std::abs(row[0] - 1.5) < 1e-12 && std::abs(row[1] - 1.5) < 1e-12 && row[2] == 0) {
            found = true;
            EXPECT_EQ(row[3], 2.25);
        }
    }
    EXPECT_TRUE(found);
}

TEST(CliSurface, JsonFormatAndRangeGuard)
{
    auto r = run_cli({"surface", "--p", "0.6,0.4", "--q", "1,1", "--n", "3", "--alpha", "1/2", "--resolution", "3",
                      "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto doc = ordered_json::parse(r.out);
    ASSERT_EQ(doc.size(), 4u);
    EXPECT_EQ(doc[1]["exact"], "4/27");
    auto four = run_cli({"surface", "--p", "1/4,1/4,1/4,1/4", "--q", "1,1,1,1", "--n", "1", "--alpha", "1/2"});
    EXPECT_EQ(four.code, 2);
}

TEST(CliVerify, PaperExamplesPass)
{
    auto b = run_cli({"verify", "--p", "0.6,0.4", "--q", "1,1", "--n", "3", "--alpha", "1/2"});
    EXPECT_EQ(b.code, 0) << b.err;
    auto doc = ordered_json::parse(b.out);
    EXPECT_TRUE(doc["pass"].get<bool>());
    EXPECT_EQ(doc["monte_carlo"]["exact"], "4/27");
    auto t = run_cli({"verify", "--p", "0.6,0.3,0.1", "--q", "1/3,1/3,1/3", "--n", "2", "--alpha", "1/2"});
    EXPECT_EQ(t.code, 0) << t.err;
    EXPECT_EQ(ordered_json::parse(t.out)["monte_carlo"]["exact"], "9/4");
}

TEST(CliVerify, CoarseGridFails)
{
    auto r = run_cli({"verify", "--p", "0.6,0.4", "--q", "1,1", "--n", "3", "--alpha", "1/2", "--resolution", "10"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("grid"), std::string::npos);
    EXPECT_FALSE(ordered_json::parse(r.out)["pass"].get<bool>());
}

TEST(CliSweep, SingleHorizonMatchesSolve)
{
    auto r = run_cli({"sweep", "--p", "0.6,0.4", "--q", "1,1", "--n", "3", "--alpha", "1/2", "--horizons", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "n,scaled_log_value,kelly_distance,W1,W2");
    auto rows = csv_rows(r.out);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0][0], 3);
    EXPECT_NEAR(rows[0][1], std::log(4.0 / 27) / 3, 1e-15);
    EXPECT_NEAR(rows[0][3], 2.0 / 3, 1e-15);
    EXPECT_NE(r.err.find("final n=3"), std::string::npos);
}

TEST(CliSweep, RangeAndGuards)
{
    auto r = run_cli({"sweep", "--p", "0.6,0.4", "--q", "1,1", "--n", "1", "--alpha", "1/2", "--horizons", "1:39:2"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto rows = csv_rows(r.out);
    ASSERT_EQ(rows.size(), 20u);
    EXPECT_EQ(rows.back()[0], 39);
    auto t = run_cli({"sweep", "--p", "0.6,0.3,0.1", "--q", "1/3,1/3,1/3", "--n", "1", "--alpha", "1/2", "--horizons",
                      "1:12:1"});
    EXPECT_EQ(t.code, 0) << t.err;
    EXPECT_EQ(csv_rows(t.out).size(), 12u);
    EXPECT_EQ(run_cli({"sweep", "--p", "0.6,0.4", "--q", "1,1", "--n", "1", "--alpha", "1/2", "--horizons", "41"}).code, 2);
    EXPECT_EQ(run_cli({"sweep", "--p", "0.6,0.4", "--q", "1,1", "--n", "1", "--alpha", "1/2", "--horizons", "5,3"}).code, 2);
}

TEST(CliConfig, JsonFileAndFlagOverride)
{
    auto path = temp_file("cfg.json", R"({"p": ["0.6", "0.4"], "q": [1, 1], "n": 3, "alpha": "1/2"})");
    auto r = run_cli({"solve", "--config", path.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(ordered_json::parse(r.out)["value"]["exact"], "4/27");
    auto o = run_cli({"solve", "--config", path.string(), "--alpha", "0.8"});
    ASSERT_EQ(o.code, 0) << o.err;
    EXPECT_EQ(ordered_json::parse(o.out)["value"]["exact"], "1/8");
    std::filesystem::remove(path);
}

TEST(CliConfig, TomlFile)
{
    auto path = temp_file("cfg.toml", "# ternary example\np = [0.6, 0.3, 0.1]\nq = [\"1/3\", \"1/3\", \"1/3\"]\n"
                                      "n = 2\nalpha = 0.5\n");
    auto r = run_cli({"solve", "--config", path.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    auto doc = ordered_json::parse(r.out);
    EXPECT_EQ(doc["value"]["exact"], "9/4");
    EXPECT_EQ(doc["instance"]["p"], (ordered_json{"3/5", "3/10", "1/10"}));
    std::filesystem::remove(path);
}

TEST(CliConfig, BrokenFilesExitTwo)
{
    auto bad = temp_file("bad.json", "{not json");
    EXPECT_EQ(run_cli({"solve", "--config", bad.string()}).code, 2);
    std::filesystem::remove(bad);
    EXPECT_EQ(run_cli({"solve", "--config", "/nonexistent/qkelly.toml"}).code, 2);
}

TEST(CliParsing, HorizonsAndHalfspaces)
{
    EXPECT_EQ(cli::parse_horizons("1,3,5"), (std::vector<int>{1, 3, 5}));
    EXPECT_EQ(cli::parse_horizons("1:7:3"), (std::vector<int>{1, 4, 7}));
    EXPECT_THROW(cli::parse_horizons("1:x"), std::invalid_argument);
    auto h = cli::parse_halfspace("1, -1/2 <= 0.25", 2);
    EXPECT_EQ(h.a, (std::vector<Rational>{1, Rational(-1, 2)}));
    EXPECT_EQ(h.b, Rational(1, 4));
    EXPECT_THROW(cli::parse_halfspace("1,2,3<=1", 2), std::invalid_argument);
}

TEST(CliOutput, OutFlagWritesFile)
{
    auto path = std::filesystem::temp_directory_path() / "qkelly_test_out.json";
    auto r = run_cli({"solve", "--p", "0.6,0.4", "--q", "1,1", "--n", "3", "--alpha", "1/2", "--out", path.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    std::ifstream in(path);
    EXPECT_EQ(ordered_json::parse(in)["value"]["exact"], "4/27");
    std::filesystem::remove(path);
}

TEST(CliBinary, ExitCodesThroughProcess)
{
    const std::string exe = QKELLY_CLI_PATH;
    auto status = [](const std::string& cmd) {
        int raw = std::system((cmd + " > /dev/null 2>&1").c_str());
        return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    };
    EXPECT_EQ(status(exe + " solve --p 0.6,0.4 --q 1,1 --n 3 --alpha 1/2"), 0);
    EXPECT_EQ(status(exe + " verify --p 0.6,0.4 --q 1,1 --n 3 --alpha 1/2 --resolution 10"), 1);
    EXPECT_EQ(status(exe + " solve --p 0.6,0.5 --q 1,1 --n 3 --alpha 1/2"), 2);
    EXPECT_EQ(status("QKELLY_THREADS=1 " + exe + " solve --p 0.6,0.3,0.1 --q 1/3,1/3,1/3 --n 2 --alpha 1/2"), 0);
}
