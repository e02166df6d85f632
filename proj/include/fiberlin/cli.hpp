#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace fiberlin {

using json = nlohmann::json;

inline constexpr const char* kToolVersion = "0.3.0";

enum ExitCode { kExitPass = 0, kExitCertifiedFailure = 2, kExitConfigError = 3 };

/// FNV-1a 64-bit hash of the bytes, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

struct CommandOutput {
  int exit_code = kExitPass;
  json report;                         ///< empty for plot
  std::string svg;                     ///< plot output, or the optional symmetry figure
  std::string svg_name;                ///< file name requested by the scenario for the figure
  std::vector<std::string> table;      ///< human-readable lines for stdout
};

/// Runs one subcommand on the scenario text. Throws ConfigError (or
/// ParseError / json errors) for malformed scenarios.
CommandOutput run_command(const std::string& command, const std::string& scenario_text);

std::vector<std::string> command_names();

}  // namespace fiberlin
