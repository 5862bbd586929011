#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dimsig::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;

// Runs one command line (without the program name). Normal output goes to
// `out`, diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace dimsig::cli
