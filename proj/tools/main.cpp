#include <cstdio>
#include <string>
#include <vector>

#include "biphoton/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    const biphoton::CommandOutcome outcome = biphoton::run_cli(args);
    if (!outcome.stdout_payload.empty())
        std::fwrite(outcome.stdout_payload.data(), 1, outcome.stdout_payload.size(), stdout);
    if (!outcome.stderr_diagnostics.empty())
        std::fwrite(outcome.stderr_diagnostics.data(), 1, outcome.stderr_diagnostics.size(),
                    stderr);
    return outcome.exit_code;
}
