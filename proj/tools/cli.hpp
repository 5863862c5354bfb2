#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ziftt::cli {

/// Stable process exit codes.
enum exit_code : int
{
  success = 0,
  runtime_failure = 1,
  usage_failure = 2,
  compliance_failure = 3,
};

/// Run the command line `args` (without the program name). Normal output
/// goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace ziftt::cli
