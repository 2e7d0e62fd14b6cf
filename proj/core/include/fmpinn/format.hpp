#pragma once

#include <cstdio>
#include <string>

namespace fmpinn {

/// Round-trip exact formatting, used for every numeric artifact so that
/// repeated runs produce byte-identical files.
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Human-friendly short form for names and logs.
inline std::string format_short(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

}  // namespace fmpinn
