#include "ntl/date.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace ntl {

namespace {

std::chrono::year_month_day ymd_of(std::chrono::sys_days d) { return std::chrono::year_month_day{d}; }

}  // namespace

Date::Date(int year, unsigned month, unsigned day) {
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                        std::chrono::day{day}};
  if (!ymd.ok()) throw std::invalid_argument("invalid calendar date");
  days_ = std::chrono::sys_days{ymd};
}

Date Date::parse(std::string_view text) {
  auto bad = [&] { return std::invalid_argument("invalid ISO-8601 date '" + std::string(text) + "'"); };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw bad();
  auto field = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    const char* first = text.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + len, v);
    if (ec != std::errc{} || ptr != first + len) throw bad();
    return v;
  };
  const int y = field(0, 4);
  const int m = field(5, 2);
  const int d = field(8, 2);
  if (m < 1 || m > 12 || d < 1 || d > 31) throw bad();
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw bad();
  return Date(std::chrono::sys_days{ymd});
}

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year(), month(), day());
  return buf;
}

int Date::year() const { return static_cast<int>(ymd_of(days_).year()); }
unsigned Date::month() const { return static_cast<unsigned>(ymd_of(days_).month()); }
unsigned Date::day() const { return static_cast<unsigned>(ymd_of(days_).day()); }

int Date::month_index() const { return year() * 12 + static_cast<int>(month()) - 1; }

Date Date::first_of_month(int month_index) {
  const int y = month_index >= 0 ? month_index / 12 : (month_index - 11) / 12;
  const int m = month_index - y * 12 + 1;
  return Date(y, static_cast<unsigned>(m), 1);
}

}  // namespace ntl
