#pragma once

#include <charconv>
#include <string>

namespace mlq {

// Shortest decimal form that round-trips to the same double. The single
// rendering used everywhere a float reaches text (printer, traces, model
// files) so that byte comparisons are meaningful.
inline std::string render_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    std::string s(buf, end);
    // ensure a float never prints as a bare integer (keeps literals typed)
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
        s.find("inf") == std::string::npos && s.find("nan") == std::string::npos) {
        s += ".0";
    }
    return s;
}

inline std::string render_int(long long v) { return std::to_string(v); }

} // namespace mlq
