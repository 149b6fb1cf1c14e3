#pragma once

#include <string>

namespace mzi {

// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

// Parse a full string as a double; throws std::invalid_argument otherwise.
double parse_double(const std::string& text);

}  // namespace mzi
