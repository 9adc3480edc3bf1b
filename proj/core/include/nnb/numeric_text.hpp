#pragma once

#include <string>
#include <string_view>

namespace nnb {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Parses the whole of `text` as a double; false on any leftover characters.
bool parse_double(std::string_view text, double& value);

}  // namespace nnb
