// cli.hpp: Run configuration, subcommand dispatch and artifact emission
//
//   easc <subcommand> --config <path> [--set key=value ...] --out <dir>
//
// A run config is the SystemConfig keys plus `parallelism`, `seed` and one
// optional block per subcommand (`trajectory`, `phase_diagram`, ...). The
// manifest written next to the outputs is itself a valid run config.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace easc::cli {

inline constexpr const char* kVersion = "1.0.0";

const std::vector<std::string>& subcommands();

// "phase-diagram" -> "phase_diagram"
std::string block_name(const std::string& subcommand);

// Applies dotted `key=value` overrides; the value is parsed as JSON when it
// is valid JSON and taken as a string otherwise.
void apply_overrides(nlohmann::json& raw, const std::vector<std::string>& overrides);

// Checks keys and types, fills defaults and returns the fully resolved config
// for one subcommand (physical keys in canonical form, only that subcommand's
// block kept). Spectrum file paths resolve against base_dir.
nlohmann::json resolve_config(const std::string& subcommand, const nlohmann::json& raw,
                              const std::filesystem::path& base_dir);

// Runs a resolved config, writing artifacts and manifest.json into out_dir.
// On any error no output of this run is left behind.
void execute(const std::string& subcommand, const nlohmann::json& resolved,
             const std::filesystem::path& out_dir);

// Full command line handling; returns the process exit code (0 ok,
// 2 validation, 3 numerical failure). Errors go to stderr as one JSON line.
int run(int argc, const char* const* argv);

} // namespace easc::cli
