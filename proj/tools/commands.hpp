#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "diffdp/gibbs.hpp"

namespace diffdp::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNumerical = 3,
};

// Flat `key = value` text (blank lines and '#' comments allowed, dotted keys
// for nested objects) or a JSON object, picked by the first non-blank byte.
nlohmann::json read_config_file(const std::filesystem::path& path);
nlohmann::json parse_key_value_config(std::istream& in);

// Runs the command line and returns the process exit code. Output goes to
// `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace diffdp::cli
