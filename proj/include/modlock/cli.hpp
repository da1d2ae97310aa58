#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace modlock::cli {

enum ExitCode : int {
  kOk = 0,
  kCompileError = 1,
  kHiddenDependency = 2,
  kUsage = 3,
  kCycle = 4,
};

/// `args` excludes the program name. Output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace modlock::cli
