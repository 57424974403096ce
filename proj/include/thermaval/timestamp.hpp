#pragma once

#include <string>

namespace thermaval {

/// Civil wall-clock time, second resolution. No timezone of its own; the
/// site's UTC offset is applied where solar time is needed.
struct Timestamp {
    int year = 2000;
    int month = 1;    // 1..12
    int day = 1;      // 1..31
    int hour = 0;
    int minute = 0;
    int second = 0;

    bool operator==(const Timestamp&) const = default;
};

bool is_leap_year(int year);
int days_in_month(int year, int month);

/// 1-based day of year (Jan 1 -> 1).
int day_of_year(const Timestamp& t);

/// Decimal clock hours since local midnight.
double clock_hours(const Timestamp& t);

/// Parses "YYYY-MM-DDTHH:MM:SS" (seconds optional). Throws ParseError.
Timestamp parse_timestamp(const std::string& s);

std::string format_timestamp(const Timestamp& t);

Timestamp add_minutes(const Timestamp& t, long long minutes);

/// Signed difference b - a in minutes.
long long minutes_between(const Timestamp& a, const Timestamp& b);

}  // namespace thermaval
