#include "doctest.h"

#include "tfilm/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace tfilm::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {
fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("tfilm_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path write_config(const fs::path& dir, const std::string& body) {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << body;
    return p;
}

int run_cmd(const std::string& cmd, const fs::path& dir, const std::string& config = "", bool dry = false) {
    Options o;
    o.command = cmd;
    o.out_dir = dir.string();
    o.threads = 2;
    o.dry_run = dry;
    if (!config.empty()) o.config_path = write_config(dir, config).string();
    std::ostringstream out, err;
    return run(o, out, err);
}
}  // namespace

TEST_CASE("every command has valid defaults") {
    for (const auto& c : commands()) {
        const json cfg = resolve_config(c, json());
        CHECK(cfg.at("schema") == kSchema);
        CHECK(cfg.at("command") == c);
    }
    CHECK_THROWS_AS(default_config("bogus"), ConfigError);
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(resolve_config("polys", json{{"nope", 1}}), ConfigError);
    CHECK_THROWS_AS(resolve_config("polys", json{{"m_min", "small"}}), ConfigError);
    CHECK_THROWS_AS(resolve_config("polys", json{{"schema", "other/1"}}), ConfigError);
    CHECK_THROWS_AS(resolve_config("polys", json{{"command", "shoot"}}), ConfigError);
    CHECK_THROWS_AS(resolve_config("polys", json::array()), ConfigError);
    CHECK_THROWS_AS(resolve_config("classify", json{{"nu_count", 0}}), ConfigError);
    CHECK_NOTHROW(resolve_config("polys", json{{"m_count", 3}}));
}

TEST_CASE("config hash") {
    const json a = resolve_config("polys", json());
    CHECK(config_hash(a) == config_hash(resolve_config("polys", json())));
    CHECK(config_hash(a).size() == 16);
    CHECK(config_hash(a) != config_hash(resolve_config("polys", json{{"m_count", 5}})));
    CHECK(csv_meta_line("polys", a) == "# tfilm " + std::string(kVersion) + " command=polys config_hash=" +
                                           config_hash(a));
}

TEST_CASE("number formatting round-trips") {
    for (double x : {0.1, -2.5e-300, 1.0 / 3.0, 6.02214076e23}) CHECK(std::stod(fmt(x)) == x);
}

TEST_CASE("exit code 2 on bad input") {
    const fs::path d = fresh_dir("bad");
    CHECK(run_cmd("polys", d, "{ not json") == 2);
    CHECK(run_cmd("polys", d, R"({"m_min": 1e400})") == 2);
    CHECK(run_cmd("classify", d, R"({"nu_count": 0})") == 2);
    Options o;
    o.command = "polys";
    o.config_path = (d / "missing.json").string();
    std::ostringstream out, err;
    CHECK(run(o, out, err) == 2);
}

TEST_CASE("dry run echoes the resolved config and writes nothing") {
    const fs::path d = fresh_dir("dry");
    Options o;
    o.command = "polys";
    o.out_dir = d.string();
    o.dry_run = true;
    std::ostringstream out, err;
    REQUIRE(run(o, out, err) == 0);
    CHECK(json::parse(out.str()) == resolve_config("polys", json()));
    CHECK(fs::is_empty(d));
}

TEST_CASE("polys output is deterministic and carries the header") {
    const fs::path d1 = fresh_dir("polys1"), d2 = fresh_dir("polys2");
    REQUIRE(run_cmd("polys", d1) == 0);
    REQUIRE(run_cmd("polys", d2) == 0);
    for (const char* f : {"polys.csv", "pz.csv"}) {
        const std::string a = slurp(d1 / f);
        CHECK(a == slurp(d2 / f));
        CHECK(a.rfind(csv_meta_line("polys", resolve_config("polys", json())), 0) == 0);
    }
    const json s = json::parse(slurp(d1 / "summary.json"));
    CHECK(s.at("config_hash") == config_hash(resolve_config("polys", json())));
}

TEST_CASE("phaseplane output") {
    const fs::path d = fresh_dir("pp");
    REQUIRE(run_cmd("phaseplane", d, R"({"n": 61, "grid_n": 11})") == 0);
    for (const char* f : {"vbar.csv", "vhat.csv", "regions.csv"}) CHECK(fs::exists(d / f));
    std::ifstream f(d / "regions.csv");
    std::string meta, cols, first;
    std::getline(f, meta);
    std::getline(f, cols);
    std::getline(f, first);
    CHECK(meta.rfind("# tfilm ", 0) == 0);
    CHECK(first.find("OnIsocline") != std::string::npos);
}

TEST_CASE("single-seed classify") {
    const fs::path d = fresh_dir("cls");
    REQUIRE(run_cmd("classify", d, R"({"a": 0.0, "nu_list": [0.00125]})") == 0);
    std::ifstream f(d / "verdicts.jsonl");
    std::string line;
    int n = 0;
    json rec;
    while (std::getline(f, line))
        if (!line.empty() && !json::parse(line).contains("meta")) {
            rec = json::parse(line);
            ++n;
        }
    CHECK(n == 1);
    CHECK(rec.at("verdict") == "BlowUp");
}

TEST_CASE("shoot failure is reported with exit code 1") {
    const fs::path d = fresh_dir("shootfail");
    REQUIRE(run_cmd("shoot", d, R"({"sigma": -0.01, "nu_lo": 0.002, "nu_hi": 0.0025})") == 1);
    const json e = json::parse(slurp(d / "error.json"));
    CHECK(e.at("error") == "BracketInvalid");
}

TEST_CASE("shoot writes a profile") {
    const fs::path d = fresh_dir("shoot");
    REQUIRE(run_cmd("shoot", d, R"({"sigma": -0.01})") == 0);
    std::ifstream f(d / "profile.csv");
    std::string meta, cols;
    std::getline(f, meta);
    std::getline(f, cols);
    CHECK(meta.rfind("# tfilm ", 0) == 0);
    CHECK(cols == "tau,xi,phi,w,psi,theta,h,dh,d2h");
    CHECK(fs::exists(d / "verdicts.jsonl"));
    const json s = json::parse(slurp(d / "summary.json"));
    CHECK(s.contains("results"));
}
