#pragma once

#include <cstdio>
#include <string>

namespace bidask::detail {

// Shortest-round-trip-adjacent formatting used by every CSV writer: %.17g
// reproduces the exact double on re-parse and is byte-stable across runs.
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

} // namespace bidask::detail
