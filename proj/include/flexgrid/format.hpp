#pragma once

#include <string>

namespace flexgrid {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace flexgrid
