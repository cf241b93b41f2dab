#pragma once

#include <string>
#include <vector>

namespace pradkit::cli {

/// Process exit statuses.
enum ExitCode : int {
  kOk = 0,
  kBadConfig = 2,
  kDataError = 3,
  kInternalError = 4,
};

/// Runs `prad <subcommand> [--config file] [--key value ...]`. `args`
/// excludes the program name. Diagnostics go to standard error.
int run(const std::vector<std::string>& args);

}  // namespace pradkit::cli
