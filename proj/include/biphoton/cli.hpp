#pragma once
#include <string>
#include <vector>

namespace biphoton {

/// Result of one CLI invocation: machine-readable payload on stdout,
/// human diagnostics on stderr. Exit codes: 0 success, 1 runtime or
/// validation failure, 2 usage error.
struct CommandOutcome {
    int exit_code = 0;
    std::string stdout_payload;
    std::string stderr_diagnostics;
};

/// Run the biphoton command line (args exclude the program name).
CommandOutcome run_cli(const std::vector<std::string>& args);

}  // namespace biphoton
