#pragma once

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>

namespace shortform {

using Date = std::chrono::year_month_day;

class DateParseError : public std::runtime_error {
public:
    explicit DateParseError(const std::string& what) : std::runtime_error(what) {}
};

inline std::chrono::sys_days to_days(const Date& d) { return std::chrono::sys_days{d}; }

inline long day_count(const Date& from, const Date& to) {
    return (to_days(to) - to_days(from)).count();
}

std::string format_date(const Date& d);

// Applies the ingestion date rules:
//   - empty text            -> nullopt (subject excluded upstream)
//   - "YYYY-MM"             -> first day of that month
//   - Feb 29 of a non-leap year -> March 1 of that year
//   - any other valid "YYYY-MM-DD" -> passes through unchanged
// Anything else throws DateParseError naming the offending value.
std::optional<Date> normalize_date(const std::string& raw);

// Age in years as days / 365.25. Throws std::invalid_argument if at < birth.
double age_years(const Date& birth, const Date& at);

// Treatment duration in weeks as days / 7. Throws if after < before.
double duration_weeks(const Date& before, const Date& after);

// Date offset helper for the synthetic generator.
Date add_days(const Date& d, long days);

}  // namespace shortform
