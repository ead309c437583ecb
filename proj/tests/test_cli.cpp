#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "selfstart/cli.hpp"

using namespace selfstart;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(const std::vector<std::string>& args, const std::string& input = "")
{
    std::istringstream in(input);
    std::ostringstream out, err;
    const int code = cli::run(args, in, out, err);
    return {code, out.str(), err.str()};
}

std::vector<json> records(const std::string& text)
{
    std::vector<json> out;
    std::istringstream is(text);
    for (std::string l; std::getline(is, l);) out.push_back(json::parse(l));
    return out;
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("selfstart_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const char* kTinyGrid = R"({
  "methods": [{"name": "SSC", "variant": "ssc"}],
  "k_pairs": [[1.0, 0.5]],
  "deltas": [2.0],
  "taus": [11],
  "reps": 200,
  "calibration_reps": 200,
  "target_arl": 50,
  "tol_arl": 1,
  "cap": 1000,
  "master_seed": 4
})";

}  // namespace

TEST_CASE("usage errors exit with 1")
{
    CHECK(run_cli({}).code == cli::kExitUsage);
    CHECK(run_cli({"frobnicate"}).code == cli::kExitUsage);
    CHECK(run_cli({"calibrate", "--chart", "ssc", "--k", "0.5", "--target-arl", "0.5"}).code == cli::kExitUsage);
    CHECK(run_cli({"calibrate", "--chart", "ssc", "--k", "0.5", "--reps", "0"}).code == cli::kExitUsage);
    CHECK(run_cli({"calibrate", "--chart", "xyz", "--k", "0.5"}).code == cli::kExitUsage);
    CHECK(run_cli({"calibrate", "--chart", "ssc", "--k", "-1"}).code == cli::kExitUsage);
    const Result bad_prior = run_cli({"calibrate", "--chart", "prc", "--k", "1", "--prior", "0,-1,1,1"});
    CHECK(bad_prior.code == cli::kExitUsage);
    CHECK(bad_prior.err.find("usage error") != std::string::npos);
    CHECK(run_cli({"ced", "--chart", "ssc", "--k", "0.5", "--h", "3", "--delta", "1", "--tau", "0"}).code ==
          cli::kExitUsage);
    CHECK(run_cli({"ced", "--chart", "ssc", "--k", "0.5", "--delta", "1", "--tau", "5"}).code == cli::kExitUsage);
    CHECK(run_cli({"monitor", "--chart", "ssc", "--k", "0.5", "--h", "-1"}).code == cli::kExitUsage);
}

TEST_CASE("version and help")
{
    const Result v = run_cli({"--version"});
    CHECK(v.code == 0);
    CHECK(v.out.find(cli::kVersion) != std::string::npos);
    CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("prior parsing")
{
    CHECK(cli::parse_prior("reference") == NigParams::reference());
    CHECK(cli::parse_prior("informative") == NigParams::weakly_informative());
    CHECK(cli::parse_prior("1,2,3,4") == NigParams{1, 2, 3, 4});
    CHECK_THROWS_AS(cli::parse_prior("1,2,3"), cli::UsageError);
    CHECK_THROWS_AS(cli::parse_prior("1,2,3,-4"), cli::UsageError);
    CHECK_THROWS_AS(cli::parse_prior("a,b,c,d"), cli::UsageError);
}

TEST_CASE("calibrate and ced are deterministic")
{
    const std::vector<std::string> cal = {"calibrate", "--chart", "prc", "--k", "1", "--prior", "informative",
                                          "--target-arl", "50", "--reps", "300", "--cap", "2000", "--seed", "7"};
    const Result a = run_cli(cal);
    const Result b = run_cli(cal);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    const json j = json::parse(a.out);
    CHECK(j["converged"] == true);
    CHECK(std::fabs(j["achieved_arl"]["arl"].get<double>() - 50.0) <= 2.0);

    const std::vector<std::string> ced = {"ced", "--chart", "ssc", "--k", "0.5", "--h", "3", "--delta", "1",
                                          "--tau", "11", "--reps", "500", "--seed", "7", "--threads", "1"};
    const Result c = run_cli(ced);
    auto ced4 = ced;
    ced4.back() = "4";
    const Result d = run_cli(ced4);
    REQUIRE(c.code == 0);
    CHECK(c.out == d.out);
    const json e = json::parse(c.out);
    CHECK(e["reps"] == 500);
    CHECK(e["ced"].get<double>() >= 1.0);
}

TEST_CASE("ced with automatic calibration")
{
    const Result r = run_cli({"ced", "--chart", "ssc", "--k", "0.5", "--auto-calibrate", "--target-arl", "40",
                              "--calibration-reps", "300", "--delta", "2", "--tau", "11", "--reps", "300",
                              "--cap", "1000"});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j["h"] == j["calibration"]["h"]);
}

TEST_CASE("monitor emits one record per observation")
{
    const Result r = run_cli({"monitor", "--chart", "ssc", "--k", "0.5", "--h", "100"}, "0.1\n-0.3\n0.7\n1.5\n");
    CHECK(r.code == 0);
    const auto recs = records(r.out);
    REQUIRE(recs.size() == 4);
    CHECK(recs[0]["warmup"] == true);
    CHECK(recs[1]["warmup"] == true);
    CHECK(recs[2]["warmup"] == false);
    CHECK(recs[3]["index"] == 4);

    // Same values as the library.
    Chart chart(ChartConfig{Variant::SSC, 0.5, 100.0});
    for (const auto& rec : recs) {
        const StepResult s = chart.step(rec["observation"].get<double>());
        CHECK(rec["increment"].get<double>() == s.increment);
        CHECK(rec["upper"].get<double>() == s.cusum.upper);
        CHECK(rec["lower"].get<double>() == s.cusum.lower);
        CHECK(rec["statistic"].get<double>() == s.statistic);
        CHECK(rec["alarm"].get<bool>() == s.alarm);
    }
}

TEST_CASE("monitor stops at the first alarm unless told otherwise")
{
    const std::string data = "0\n1\n9\n9\n9\n";
    const auto stop = records(run_cli({"monitor", "--chart", "ssc", "--k", "0.5", "--h", "0.5"}, data).out);
    REQUIRE(stop.size() == 3);
    CHECK(stop.back()["alarm"] == true);
    const auto all =
        records(run_cli({"monitor", "--chart", "ssc", "--k", "0.5", "--h", "0.5", "--no-stop"}, data).out);
    CHECK(all.size() == 5);
}

TEST_CASE("monitor data errors")
{
    const Result deg = run_cli({"monitor", "--chart", "ssc", "--k", "0.5", "--h", "5"}, "5\n5\n5\n6\n7\n");
    CHECK(deg.code == cli::kExitData);
    const auto recs = records(deg.out);
    REQUIRE(recs.size() == 5);
    CHECK(recs[2]["index"] == 3);
    CHECK(recs[2].contains("error"));
    // 6 is still scored against the constant history 5, 5, 5.
    CHECK(recs[3].contains("error"));
    CHECK_FALSE(recs[4].contains("error"));
    CHECK(recs[4]["warmup"] == false);

    const Result bad = run_cli({"monitor", "--chart", "prc", "--k", "1", "--h", "5"}, "1\nabc\n2\n\n3\n");
    CHECK(bad.code == cli::kExitData);
    const auto b = records(bad.out);
    REQUIRE(b.size() == 4);
    CHECK(b[1]["line"] == 2);
    CHECK(b[1].contains("error"));
    CHECK(b[3]["index"] == 3);

    CHECK(run_cli({"monitor", "--chart", "ssc", "--k", "0.5", "--h", "5", "--input", "/nonexistent/x"}).code ==
          cli::kExitUsage);
}

TEST_CASE("grid writes its outputs and replays byte for byte")
{
    const fs::path dir = scratch("grid");
    std::ofstream(dir / "config.json") << kTinyGrid;
    const Result r = run_cli({"grid", "--config", (dir / "config.json").string(), "--out-dir",
                              (dir / "a").string(), "--quiet"});
    REQUIRE(r.code == 0);
    for (const char* f : {"table.csv", "table.txt", "figure.csv", "manifest.json"}) {
        CHECK(fs::exists(dir / "a" / f));
    }
    const json m = json::parse(slurp(dir / "a" / "manifest.json"));
    CHECK(m["command"] == "grid");
    CHECK(m["master_seed"] == 4);
    CHECK(m["version"] == cli::kVersion);
    CHECK(m.contains("timestamp"));
    CHECK(m["calibrations"].size() == 1);

    const Result rep = run_cli({"replay", (dir / "a" / "manifest.json").string(), "--out-dir", (dir / "b").string()});
    REQUIRE(rep.code == 0);
    CHECK(slurp(dir / "a" / "table.csv") == slurp(dir / "b" / "table.csv"));
    CHECK(slurp(dir / "a" / "figure.csv") == slurp(dir / "b" / "figure.csv"));
    CHECK(slurp(dir / "a" / "table.txt") == slurp(dir / "b" / "table.txt"));
    fs::remove_all(dir);
}

TEST_CASE("replay of a calibrate manifest reproduces its output")
{
    const fs::path dir = scratch("calrep");
    const std::string man = (dir / "m.json").string();
    const Result a = run_cli({"calibrate", "--chart", "ssc", "--k", "0.5", "--target-arl", "30", "--reps", "200",
                              "--cap", "1000", "--seed", "3", "--manifest", man});
    REQUIRE(a.code == 0);
    const Result b = run_cli({"replay", man});
    CHECK(b.code == 0);
    CHECK(a.out == b.out);
    fs::remove_all(dir);
}

TEST_CASE("grid failures")
{
    const fs::path dir = scratch("gridfail");
    std::ofstream(dir / "config.json") << kTinyGrid;
    std::ofstream(dir / "blocker") << "x";
    const Result unwritable = run_cli({"grid", "--config", (dir / "config.json").string(), "--out-dir",
                                       (dir / "blocker" / "out").string(), "--quiet"});
    CHECK(unwritable.code == cli::kExitRuntime);

    std::ofstream(dir / "bad.json") << "{\n  \"reps\": 10,\n  \"taus\": [11,\n}\n";
    const Result bad = run_cli({"grid", "--config", (dir / "bad.json").string(), "--out-dir",
                                (dir / "o").string(), "--quiet"});
    CHECK(bad.code == cli::kExitUsage);
    CHECK(bad.err.find("line 4") != std::string::npos);

    std::ofstream(dir / "unknown.json") << R"({"repz": 10})";
    const Result unknown = run_cli({"grid", "--config", (dir / "unknown.json").string(), "--out-dir",
                                    (dir / "o").string(), "--quiet"});
    CHECK(unknown.code == cli::kExitUsage);
    CHECK(unknown.err.find("repz") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("grid config round trip")
{
    GridSpec g;
    g.reps = 123;
    g.deltas = {0.25, 3.0};
    g.methods = {Method::prc_informative(), {"custom", Variant::PRC, {1.0, 2.0, 3.0, 4.0}}};
    g.common_random_numbers = true;
    g.side = Side::Upper;
    const std::string text = cli::grid_config_json(g);
    const GridSpec back = cli::parse_grid_config(text);
    CHECK(cli::grid_config_json(back) == text);
    CHECK(back.methods[1].prior == NigParams{1.0, 2.0, 3.0, 4.0});
    CHECK(back.side == Side::Upper);
}
