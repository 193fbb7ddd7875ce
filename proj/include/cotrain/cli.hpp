#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cotrain::cli {

/// Process exit codes.
enum ExitCode : int {
    kSuccess = 0,
    kRuntimeError = 1,
    kUsageError = 2,
    kDiverged = 3,
};

/// Entry point behind the `cotrain` executable. `args` excludes the program
/// name. Output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cotrain::cli
