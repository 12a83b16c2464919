#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace coedit {

// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitFingerprint = 3;

/// Runs one CLI invocation; args exclude the program name. Data goes to
/// `out`, diagnostics and progress to `err`.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace coedit
