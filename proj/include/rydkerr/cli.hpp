#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rydkerr {

enum ExitCode : int {
  exit_ok = 0,
  exit_usage = 1,
  exit_config = 2,
  exit_numeric = 3,
  exit_signal = 4,
};

/// Runs the rydkerr command line (without the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rydkerr
