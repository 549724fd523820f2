#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace argsim::cli {

inline constexpr const char* kToolVersion = "argsim 1.0.0";

/// Default size above which `simulate` writes one file per replicate.
inline constexpr std::size_t kDefaultSplitBytes = std::size_t{64} << 20;

/// Entry point of the `argsim` tool. Returns the process exit code:
/// 0 success, 1 a failed validation or comparison, 2 bad input or parse
/// error, 3 an engine produced an invalid path.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace argsim::cli
