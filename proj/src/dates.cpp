#include "shortform/dates.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

namespace shortform {

namespace {

bool parse_int_field(const std::string& s, size_t begin, size_t end, int& out) {
    if (begin >= end || end > s.size()) return false;
    for (size_t i = begin; i < end; ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    auto [ptr, ec] = std::from_chars(s.data() + begin, s.data() + end, out);
    return ec == std::errc{} && ptr == s.data() + end;
}

}  // namespace

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

std::optional<Date> normalize_date(const std::string& raw) {
    if (raw.empty()) return std::nullopt;

    int y = 0, m = 0, dd = 0;
    const bool year_month = raw.size() == 7 && raw[4] == '-' &&
                            parse_int_field(raw, 0, 4, y) && parse_int_field(raw, 5, 7, m);
    const bool full = raw.size() == 10 && raw[4] == '-' && raw[7] == '-' &&
                      parse_int_field(raw, 0, 4, y) && parse_int_field(raw, 5, 7, m) &&
                      parse_int_field(raw, 8, 10, dd);
    if (!year_month && !full)
        throw DateParseError("unparseable date: \"" + raw + "\"");

    if (year_month) dd = 1;  // day-of-month missing: impute the first

    if (m < 1 || m > 12)
        throw DateParseError("unparseable date: \"" + raw + "\"");

    const Date ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                   std::chrono::day{static_cast<unsigned>(dd)}};
    if (ymd.ok()) return ymd;

    // Feb 29 of a non-leap year becomes March 1 of the same year.
    if (m == 2 && dd == 29)
        return Date{std::chrono::year{y}, std::chrono::month{3}, std::chrono::day{1}};

    throw DateParseError("unparseable date: \"" + raw + "\"");
}

double age_years(const Date& birth, const Date& at) {
    const long days = day_count(birth, at);
    if (days < 0) throw std::invalid_argument("age_years: date precedes birth date");
    return static_cast<double>(days) / 365.25;
}

double duration_weeks(const Date& before, const Date& after) {
    const long days = day_count(before, after);
    if (days < 0) throw std::invalid_argument("duration_weeks: after precedes before");
    return static_cast<double>(days) / 7.0;
}

Date add_days(const Date& d, long days) {
    return Date{to_days(d) + std::chrono::days{days}};
}

}  // namespace shortform
