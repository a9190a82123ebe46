#pragma once

#include <string>
#include <string_view>

namespace gaitstrip {

// Shortest round-trip decimal form, '.' separator regardless of locale.
// Integral values keep a trailing ".0" so the output always reads as a float.
std::string format_double(double v);

// Inverse of format_double; throws ParameterError on malformed input.
double parse_double(std::string_view s);
float parse_float(std::string_view s);

} // namespace gaitstrip
