#include "gaitstrip/format.hpp"

#include "gaitstrip/errors.hpp"

#include <charconv>
#include <cmath>

namespace gaitstrip {

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    std::string s(buf, end);
    if (std::isfinite(v) && s.find_first_of(".e") == std::string::npos)
        s += ".0";
    return s;
}

double parse_double(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParameterError("malformed number '" + std::string(s) + "'");
    return v;
}

float parse_float(std::string_view s) {
    float v = 0.0f;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParameterError("malformed number '" + std::string(s) + "'");
    return v;
}

} // namespace gaitstrip
