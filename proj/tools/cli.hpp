#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace phishgraph::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInternal = 3;

/// Runs one command line (without the program name). Diagnostics go to `err`,
/// progress to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace phishgraph::cli
