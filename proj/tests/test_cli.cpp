#include "iaps/cli.hpp"
#include "iaps/scenario.hpp"

#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace iaps;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code;
    std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path temp_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("iaps_cli_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// desk-scale config so CLI tests stay fast
std::string small_config_json() {
    ScenarioConfig cfg;
    cfg.M = 8;
    cfg.N0 = 10;
    cfg.N1 = 10;
    cfg.K = 3;
    cfg.R = 3;
    cfg.L = 12;
    cfg.trials = 4;
    return config_to_json(cfg);
}

} // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("usage errors exit 1") {
    auto r = cli({"frobnicate"});
    CHECK(r.code == 1);
    auto r2 = cli({"run", "--no-such-flag"});
    CHECK(r2.code == 1);
    CHECK(r2.err.find("Usage") != std::string::npos);
    auto r3 = cli({"run"});
    CHECK(r3.code == 1); // neither --figure nor --spec
}

TEST_CASE("help exits 0") {
    auto r = cli({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("gen-scenario") != std::string::npos);
}

TEST_CASE("config errors exit 1") {
    fs::path dir = temp_dir("cfg");
    fs::path cfg = dir / "bad.json";
    {
        std::ofstream f(cfg);
        f << "{\"K\": 99}";
    }
    auto r = cli({"run", "--figure", "fig6", "--config", cfg.string(), "--out", dir.string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("config error") != std::string::npos);

    auto r2 = cli({"run", "--figure", "fig6", "--set", "nonsense=1", "--out", dir.string()});
    CHECK(r2.code == 1);
}

TEST_CASE("run twice produces byte-identical CSVs and a manifest") {
    fs::path dir = temp_dir("run");
    fs::path cfg = dir / "cfg.json";
    {
        std::ofstream f(cfg);
        f << small_config_json();
    }
    std::vector<std::string> args{"run",    "--figure", "fig6",       "--trials", "3",
                                  "--seed", "7",        "--config",   cfg.string(),
                                  "--out",  (dir / "a").string()};
    auto r1 = cli(args);
    REQUIRE(r1.code == 0);
    args.back() = (dir / "b").string();
    auto r2 = cli(args);
    REQUIRE(r2.code == 0);
    CHECK(slurp(dir / "a" / "fig6.csv") == slurp(dir / "b" / "fig6.csv"));
    CHECK(slurp(dir / "a" / "fig6.svg") == slurp(dir / "b" / "fig6.svg"));

    std::string manifest = slurp(dir / "a" / "manifest.json");
    CHECK(manifest.find("config_fnv64") != std::string::npos);
    CHECK(manifest.find("\"seed\": 7") != std::string::npos);
    CHECK(manifest.find("csv_schema") != std::string::npos);
    // the input config file is untouched
    CHECK(slurp(cfg) == small_config_json());
}

TEST_CASE("gen-scenario writes layout and channel CSVs") {
    fs::path dir = temp_dir("gen");
    fs::path cfg = dir / "cfg.json";
    {
        std::ofstream f(cfg);
        f << small_config_json();
    }
    auto r = cli({"gen-scenario", "--config", cfg.string(), "--out", dir.string(), "--seed", "9"});
    REQUIRE(r.code == 0);
    CHECK(slurp(dir / "layout.csv").substr(0, 4) == "kind");
    CHECK(slurp(dir / "channels.csv").substr(0, 4) == "name");
    // deterministic under the same seed
    fs::path dir2 = temp_dir("gen2");
    auto r2 = cli({"gen-scenario", "--config", cfg.string(), "--out", dir2.string(), "--seed", "9"});
    REQUIRE(r2.code == 0);
    CHECK(slurp(dir / "layout.csv") == slurp(dir2 / "layout.csv"));
}

TEST_CASE("plot verb renders curve and layout CSVs") {
    fs::path dir = temp_dir("plot");
    fs::path cfg = dir / "cfg.json";
    {
        std::ofstream f(cfg);
        f << small_config_json();
    }
    REQUIRE(cli({"gen-scenario", "--config", cfg.string(), "--out", dir.string()}).code == 0);
    auto r = cli({"plot", "--csv", (dir / "layout.csv").string(), "--out-file",
                  (dir / "fig5.svg").string()});
    CHECK(r.code == 0);
    CHECK(slurp(dir / "fig5.svg").find("<svg") != std::string::npos);
    auto bad = cli({"plot", "--csv", (dir / "missing.csv").string(), "--out-file",
                    (dir / "x.svg").string()});
    CHECK(bad.code == 1);
}

TEST_CASE("oracle verb writes checksummed tables and reproduces itself") {
    fs::path dir = temp_dir("oracle");
    auto r = cli({"oracle", "--out", dir.string()});
    REQUIRE(r.code == 0);
    for (const char* name : {"chi2_sf_reference.csv", "vote_error_reference.csv",
                             "lp_toy_reference.csv"}) {
        CHECK(fs::exists(dir / name));
        CHECK(fs::exists(dir / (std::string(name) + ".fnv64")));
    }
    fs::path dir2 = temp_dir("oracle2");
    REQUIRE(cli({"oracle", "--out", dir2.string()}).code == 0);
    CHECK(slurp(dir / "chi2_sf_reference.csv") == slurp(dir2 / "chi2_sf_reference.csv"));
    CHECK(slurp(dir / "chi2_sf_reference.csv.fnv64") == slurp(dir2 / "chi2_sf_reference.csv.fnv64"));
}

TEST_CASE("infeasible-dominated runs exit 2") {
    fs::path dir = temp_dir("infeasible");
    // an unattainable SINR threshold makes every trial infeasible
    auto r = cli({"run", "--figure", "fig6", "--trials", "2", "--out", dir.string(), "--set",
                  "gamma_db=180", "--set", "K=3", "--set", "M=8", "--set", "N0=10", "--set",
                  "N1=10", "--set", "R=3", "--set", "L=12"});
    CHECK(r.code == 2);
}

TEST_CASE("IAPS_OUT is the output-directory fallback") {
    fs::path dir = temp_dir("envout");
    setenv("IAPS_OUT", dir.string().c_str(), 1);
    auto r = cli({"oracle"});
    unsetenv("IAPS_OUT");
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir / "chi2_sf_reference.csv"));
}

TEST_CASE("spec file run") {
    fs::path dir = temp_dir("spec");
    fs::path spec = dir / "spec.json";
    {
        std::ofstream f(spec);
        f << "{\"figure\":\"custom\",\"var\":\"sigma_rcs_db\",\"values\":[-20,-18],"
             "\"schemes\":[\"iaps_s0\",\"active\"],\"regimes\":[\"unlimited\"],"
             "\"trials\":3,\"seed\":2,"
             "\"base\":" << small_config_json() << "}";
    }
    auto r = cli({"run", "--spec", spec.string(), "--out", dir.string()});
    REQUIRE(r.code == 0);
    std::string csv = slurp(dir / "custom.csv");
    CHECK(csv.find("iaps_s0") != std::string::npos);
    CHECK(csv.find("active") != std::string::npos);
}

TEST_SUITE_END();
