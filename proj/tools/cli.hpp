#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ecgraph::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumeric = 3;

/// Runs the command line `args` (without the program name). Tables go to
/// files under --out, or to `out` when no directory is given; human-readable
/// summaries and errors go to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ecgraph::cli
