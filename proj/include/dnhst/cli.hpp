#pragma once

// Command-line front end. run_cli is the whole program minus main(), so tests
// can drive it in-process.

#include <iosfwd>
#include <string>
#include <vector>

namespace dnhst::cli {

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,   // bad arguments, unreadable or malformed data
  kExitSolver = 3,  // an internal solver missed its tolerance
};

/// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dnhst::cli
