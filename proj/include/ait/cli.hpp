#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ait {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs the command line `ait <args...>` (args excludes the program name) and
/// returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ait
