#pragma once

#include <iosfwd>

namespace viscowave {

/// Entry point of the command-line tool: subcommands run, analyze-kernel,
/// fit and reproduce. Returns the process exit code (0 ok, 1 configuration
/// error, 2 blow-up; reproduce also returns 1 when a required envelope fails).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace viscowave
