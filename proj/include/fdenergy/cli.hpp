#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fdenergy::cli {

enum ExitCode { kOk = 0, kValidationError = 1, kUsageError = 2 };

/// Runs one command line (without the program name). Results go to `out`
/// unless --out redirects them; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fdenergy::cli
