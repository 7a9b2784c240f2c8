#pragma once

// Command-line driver: config resolution, artifact writers and subcommands.

#include "tfilm/shooting.hpp"

#include "json.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tfilm::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kSchema = "tfilm-config/1";
inline constexpr const char* kThreadsEnv = "TFILM_THREADS";

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string command;
    std::optional<std::string> config_path;
    std::string out_dir = ".";
    int threads = 0;  // 0: TFILM_THREADS or hardware concurrency
    bool dry_run = false;
};

const std::vector<std::string>& commands();

nlohmann::json default_config(const std::string& command);
// Defaults overlaid with the user object; throws ConfigError on unknown keys,
// type mismatches or out-of-range values.
nlohmann::json resolve_config(const std::string& command, const nlohmann::json& user);

// FNV-1a 64 of the compact dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& cfg);

// Shortest round-trip formatting used in every CSV cell.
std::string fmt(double x);

// "# tfilm <version> command=<cmd> config_hash=<hash>"
std::string csv_meta_line(const std::string& command, const nlohmann::json& cfg);

// Profile CSV body (column row plus one row per off-slice node) of a
// heteroclinic search, preceded by the given metadata line.
std::string profile_csv(const HeteroclinicResult& r, const std::string& meta_line);

// Executes a resolved command; returns the process exit code.
int run(const Options& opt, std::ostream& out, std::ostream& err);

int main_entry(int argc, char** argv);

}  // namespace tfilm::cli
