#pragma once

#include <iosfwd>

namespace voltran::cli {

enum ExitCode : int {
    ok = 0,
    config_error = 1,
    not_converged = 2,
    mc_failed = 3,
};

/// Command-line entry point. Returns the process exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace voltran::cli
