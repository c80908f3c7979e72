#pragma once

#include <charconv>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace mddpg {

// Shortest decimal form that parses back to the identical double. All CSV
// output goes through this so exported files round-trip bit-exactly.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::invalid_argument("bad numeric field: '" + s + "'");
    return v;
}

} // namespace mddpg
