#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace emfend::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kInternalError = 3,
};

/// Runs one `emfend` subcommand. `args` excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace emfend::cli
