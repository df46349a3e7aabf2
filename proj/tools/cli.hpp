#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace crn::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 2,
  kNegative = 3,
  kNumerical = 4,
  kInconclusive = 5,
};

/// Runs one subcommand. `args` excludes the program name. Results go to the
/// --out file or `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace crn::cli
