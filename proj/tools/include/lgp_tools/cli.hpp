#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lgp::tools {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitIngestion = 3,
};

/// Entry point of the `lgp` executable. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lgp::tools
