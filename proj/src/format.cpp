#include "mzi/format.hpp"

#include <charconv>
#include <stdexcept>
#include <system_error>

namespace mzi {

std::string format_double(double value) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (result.ec != std::errc{}) {
        throw std::runtime_error("failed to format double");
    }
    return std::string(buffer, result.ptr);
}

double parse_double(const std::string& text) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (first != last && *first == '+') {
        ++first;
    }
    const auto result = std::from_chars(first, last, value);
    if (result.ec != std::errc{} || result.ptr != last) {
        throw std::invalid_argument("not a number: '" + text + "'");
    }
    return value;
}

}  // namespace mzi
