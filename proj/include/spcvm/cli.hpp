#pragma once

#include "spcvm/rf_sim.hpp"

#include <map>
#include <string>
#include <vector>

namespace spcvm {

inline constexpr const char* kVersion = "0.1.0";

// Parses a `key = value` config file ('#' starts a comment). Throws
// Error(config) with the line number on malformed lines and lists unknown
// keys. Returns the raw key/value pairs for the manifest.
std::map<std::string, std::string> parse_config_file(const std::string& path);

// Applies parsed file values onto a SimulationConfig; unknown keys raise.
void apply_simulation_config(SimulationConfig& config,
                             const std::map<std::string, std::string>& kv);

// Full CLI: parses argv, dispatches the subcommand, writes the run manifest,
// and maps errors onto exit codes (0 ok, 2 config, 3 data, 4 numeric).
int run_cli(int argc, const char* const* argv);

} // namespace spcvm
