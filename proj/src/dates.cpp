#include "langtraj/dates.hpp"

#include <charconv>

#include "langtraj/errors.hpp"

namespace langtraj {

namespace {

int parse_fixed(std::string_view text, std::string_view whole) {
  int value = 0;
  for (char c : text) {
    if (c < '0' || c > '9') {
      throw ParseError("invalid ISO-8601 date '" + std::string(whole) + "'");
    }
    value = value * 10 + (c - '0');
  }
  return value;
}

}  // namespace

Date parse_iso_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw ParseError("invalid ISO-8601 date '" + std::string(text) + "'");
  }
  const int y = parse_fixed(text.substr(0, 4), text);
  const int m = parse_fixed(text.substr(5, 2), text);
  const int d = parse_fixed(text.substr(8, 2), text);
  const Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!date.ok()) {
    throw ParseError("invalid calendar date '" + std::string(text) + "'");
  }
  return date;
}

std::string format_iso_date(Date date) {
  char buf[16];
  const int y = static_cast<int>(date.year());
  const unsigned m = static_cast<unsigned>(date.month());
  const unsigned d = static_cast<unsigned>(date.day());
  buf[0] = static_cast<char>('0' + (y / 1000) % 10);
  buf[1] = static_cast<char>('0' + (y / 100) % 10);
  buf[2] = static_cast<char>('0' + (y / 10) % 10);
  buf[3] = static_cast<char>('0' + y % 10);
  buf[4] = '-';
  buf[5] = static_cast<char>('0' + m / 10);
  buf[6] = static_cast<char>('0' + m % 10);
  buf[7] = '-';
  buf[8] = static_cast<char>('0' + d / 10);
  buf[9] = static_cast<char>('0' + d % 10);
  return std::string(buf, 10);
}

long days_between(Date from, Date to) {
  return (std::chrono::sys_days{to} - std::chrono::sys_days{from}).count();
}

double years_between(Date from, Date to) {
  return static_cast<double>(days_between(from, to)) / kDaysPerYear;
}

Date add_days(Date date, long days) {
  return Date{std::chrono::sys_days{date} + std::chrono::days{days}};
}

double years_since_911(Date date) {
  static constexpr Date kAttack{std::chrono::year{2001}, std::chrono::month{9}, std::chrono::day{11}};
  return years_between(kAttack, date);
}

}  // namespace langtraj
