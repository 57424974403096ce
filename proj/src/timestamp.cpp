#include "thermaval/timestamp.hpp"

#include <cstdio>

#include "thermaval/errors.hpp"

namespace thermaval {

bool is_leap_year(int year) {
    return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int days_in_month(int year, int month) {
    static const int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month < 1 || month > 12) throw ParseError("month out of range");
    if (month == 2 && is_leap_year(year)) return 29;
    return days[month - 1];
}

int day_of_year(const Timestamp& t) {
    int n = t.day;
    for (int m = 1; m < t.month; ++m) n += days_in_month(t.year, m);
    return n;
}

double clock_hours(const Timestamp& t) {
    return t.hour + t.minute / 60.0 + t.second / 3600.0;
}

Timestamp parse_timestamp(const std::string& text) {
    Timestamp t;
    int n = 0;
    int got = std::sscanf(text.c_str(), "%d-%d-%dT%d:%d:%d%n", &t.year, &t.month,
                          &t.day, &t.hour, &t.minute, &t.second, &n);
    if (got < 5) {
        throw ParseError("bad timestamp '" + text +
                         "' (expected YYYY-MM-DDTHH:MM[:SS])");
    }
    if (got == 5) t.second = 0;
    if (t.month < 1 || t.month > 12 || t.day < 1 ||
        t.day > days_in_month(t.year, t.month) || t.hour < 0 || t.hour > 23 ||
        t.minute < 0 || t.minute > 59 || t.second < 0 || t.second > 59) {
        throw ParseError("timestamp fields out of range in '" + text + "'");
    }
    return t;
}

std::string format_timestamp(const Timestamp& t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d", t.year,
                  t.month, t.day, t.hour, t.minute, t.second);
    return buf;
}

namespace {

// Days since 2000-01-01 for any civil date.
long long day_number(int year, int month, int day) {
    long long n = 0;
    if (year >= 2000) {
        for (int y = 2000; y < year; ++y) n += is_leap_year(y) ? 366 : 365;
    } else {
        for (int y = year; y < 2000; ++y) n -= is_leap_year(y) ? 366 : 365;
    }
    for (int m = 1; m < month; ++m) n += days_in_month(year, m);
    return n + day - 1;
}

}  // namespace

Timestamp add_minutes(const Timestamp& t, long long minutes) {
    long long total = t.second + 60ll * (t.minute + minutes) + 3600ll * t.hour;
    long long days = total / 86400;
    long long rem = total % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    Timestamp out = t;
    out.hour = static_cast<int>(rem / 3600);
    out.minute = static_cast<int>(rem % 3600 / 60);
    out.second = static_cast<int>(rem % 60);
    out.day += static_cast<int>(days);
    while (out.day > days_in_month(out.year, out.month)) {
        out.day -= days_in_month(out.year, out.month);
        if (++out.month > 12) {
            out.month = 1;
            ++out.year;
        }
    }
    while (out.day < 1) {
        if (--out.month < 1) {
            out.month = 12;
            --out.year;
        }
        out.day += days_in_month(out.year, out.month);
    }
    return out;
}

long long minutes_between(const Timestamp& a, const Timestamp& b) {
    long long da = day_number(a.year, a.month, a.day);
    long long db = day_number(b.year, b.month, b.day);
    long long sa = a.hour * 3600ll + a.minute * 60 + a.second;
    long long sb = b.hour * 3600ll + b.minute * 60 + b.second;
    return ((db - da) * 86400 + sb - sa) / 60;
}

}  // namespace thermaval
