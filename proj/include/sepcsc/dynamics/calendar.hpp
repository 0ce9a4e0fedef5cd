#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include "sepcsc/core/error.hpp"

namespace sepcsc::calendar {

/// Julian date of a Gregorian calendar instant (UTC, no leap seconds).
inline double julian_date(int year, int month, int day, int hour = 0, int minute = 0, double second = 0.0) {
    const int a = (14 - month) / 12;
    const int y = year + 4800 - a;
    const int m = month + 12 * a - 3;
    const long jdn = day + (153 * m + 2) / 5 + 365L * y + y / 4 - y / 100 + y / 400 - 32045;
    return static_cast<double>(jdn) - 0.5 + (hour + (minute + second / 60.0) / 60.0) / 24.0;
}

/**
 * @brief Parses "YYYY-MM-DD", "YYYY-MM-DDThh:mm:ss" or a plain Julian date
 * ("2460478.5", optionally prefixed "JD").
 */
inline double parse_epoch(const std::string &text) {
    int y = 0, mo = 0, d = 0, hh = 0, mi = 0;
    double ss = 0.0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%d-%d-%dT%d:%d:%lf%c", &y, &mo, &d, &hh, &mi, &ss, &tail) >= 6 ||
        std::sscanf(text.c_str(), "%d-%d-%d %d:%d:%lf%c", &y, &mo, &d, &hh, &mi, &ss, &tail) >= 6) {
        if (tail != 0 && tail != 'Z') throw ConfigError("epoch '" + text + "': trailing characters");
        return julian_date(y, mo, d, hh, mi, ss);
    }
    if (std::sscanf(text.c_str(), "%d-%d-%d%c", &y, &mo, &d, &tail) == 3) {
        if (mo < 1 || mo > 12 || d < 1 || d > 31) throw ConfigError("epoch '" + text + "': invalid calendar date");
        return julian_date(y, mo, d);
    }
    const char *s = text.c_str();
    if (text.rfind("JD", 0) == 0) s += 2;
    char *end = nullptr;
    const double jd = std::strtod(s, &end);
    if (end == s || *end != '\0' || !std::isfinite(jd)) throw ConfigError("epoch '" + text + "' is not a date or Julian date");
    return jd;
}

} // namespace sepcsc::calendar
