#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace romkit {

/// Exit status categories.
inline constexpr int exit_ok = 0;
inline constexpr int exit_argument = 2;
inline constexpr int exit_numeric = 3;
inline constexpr int exit_io = 4;

/// Runs the command line; `args` excludes the program name. Summaries go
/// to `out`, warnings and errors to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_cli(int argc, char** argv);

}  // namespace romkit
