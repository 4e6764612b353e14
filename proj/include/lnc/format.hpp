#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace lnc {

/// Shortest decimal text that parses back to exactly the same double.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, res.ptr};
}

}  // namespace lnc
