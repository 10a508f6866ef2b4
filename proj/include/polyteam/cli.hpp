#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace polyteam::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  exit_true = 0,
  exit_false = 1,
  exit_exhausted = 2,
  exit_error = 3,
};

/// Runs one command. `args` excludes the program name. Results go to `out`,
/// notices and errors to `err`.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace polyteam::cli
