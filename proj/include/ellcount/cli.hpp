#pragma once

// Command-line front end. Exit codes: 0 success, 1 an inequality check
// failed, 2 usage or configuration error, 3 numerical failure.

#include <ostream>
#include <string>
#include <vector>

namespace ellcount::cli {

enum ExitCode { kOk = 0, kCheckFailed = 1, kConfigError = 2, kNumericalFailure = 3 };

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ellcount::cli
