#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pmdlab::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kBadInput = 2;
inline constexpr int kSupportCap = 3;
inline constexpr int kExecutionCap = 4;

/// Runs one command line (args excludes the program name). Output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pmdlab::cli
