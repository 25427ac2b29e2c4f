#pragma once

#include <cstdio>
#include <string>

namespace criticalwave {

/// 17 significant digits, locale independent; used by the CSV writers.
inline std::string fmt17(double value)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

} // namespace criticalwave
