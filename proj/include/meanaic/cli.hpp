#pragma once

#include <ostream>

namespace meanaic {

/// Exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitDataError = 2,
    kExitFitFailure = 3,
};

/// Entry point for the `meanaic` tool with subcommands `select`, `simulate`
/// and `generate`. Reports go to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace meanaic
