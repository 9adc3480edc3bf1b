#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nnb::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one `nnb` invocation. `args` excludes the program name.
/// `in` feeds `predict` when no input file is given.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace nnb::cli
