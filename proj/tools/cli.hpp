#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rmats::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kRuntime = 2 };

// Runs one command line (args[0] is the program name). Diagnostics go to
// `err`; `validate` and `convergence` without --out print to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rmats::cli
