#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace georeg::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;       // bad input, config or I/O
inline constexpr int kExitInfeasible = 2;  // valid input, infeasible regime or degenerate geometry

/// Runs the command line `args` (args[0] is the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace georeg::cli
