#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cellshot::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitEstimation = 3;

/// Runs `cellshot <subcommand> ...`; args excludes the program name.
/// Returns the process exit code: 0 success, 2 input error, 3 numeric or
/// estimation failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace cellshot::cli
