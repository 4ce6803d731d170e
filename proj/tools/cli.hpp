#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace boro::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,      // I/O and other unexpected failures
  kParseError = 2,   // bad flags, config keys, data files or argument values
  kSolverError = 3,  // a numerical routine failed
};

/// Runs the `boro` command line. `args` excludes the program name. Data goes to
/// `out`, diagnostics (including the resolved configuration) to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses a `key = value` config file: one entry per line, '#' starts a
/// comment, and a key may appear at most once. Unknown keys are rejected.
std::map<std::string, std::string> read_config(std::istream& in, const std::string& source);

}  // namespace boro::cli
