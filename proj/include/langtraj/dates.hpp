#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace langtraj {

using Date = std::chrono::year_month_day;

inline constexpr double kDaysPerYear = 365.25;

/// Parses a strict ISO-8601 calendar date (YYYY-MM-DD). Throws ParseError.
Date parse_iso_date(std::string_view text);
std::string format_iso_date(Date date);

/// Signed number of days from `from` to `to`.
long days_between(Date from, Date to);
/// Signed years from `from` to `to`, using 365.25-day years.
double years_between(Date from, Date to);
Date add_days(Date date, long days);

/// Years between 2001-09-11 and the given date.
double years_since_911(Date date);

}  // namespace langtraj
