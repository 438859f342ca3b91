#pragma once

namespace graspkb::cli {

/// Exit codes of the graspkb executable.
enum Exit : int {
    exit_ok = 0,
    exit_internal = 1,
    exit_usage = 2,
    exit_validation = 3,
    exit_numeric = 4,
};

/// Parses the command line, runs one subcommand and returns its exit code.
int run(int argc, char const* const* argv);

} // namespace graspkb::cli
