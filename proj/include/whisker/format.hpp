#pragma once

#include <string>

namespace whisker {

// Shortest text that parses back to the same double.
std::string format_double(double v);

}  // namespace whisker
