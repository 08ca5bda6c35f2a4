#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace ntl {

/// Calendar date with day precision. Text form is ISO-8601 (YYYY-MM-DD).
class Date {
 public:
  Date() = default;
  Date(int year, unsigned month, unsigned day);
  explicit Date(std::chrono::sys_days days) : days_(days) {}

  /// Throws std::invalid_argument on anything but a valid YYYY-MM-DD.
  static Date parse(std::string_view text);

  std::string iso() const;

  int year() const;
  unsigned month() const;
  unsigned day() const;

  /// Months since year 0, so consecutive calendar months differ by one.
  int month_index() const;
  static Date first_of_month(int month_index);

  Date plus_days(int n) const { return Date(days_ + std::chrono::days{n}); }
  std::chrono::sys_days sys_days() const { return days_; }

  friend int days_between(Date from, Date to) { return (to.days_ - from.days_).count(); }
  friend bool operator==(const Date&, const Date&) = default;
  friend auto operator<=>(const Date&, const Date&) = default;

 private:
  std::chrono::sys_days days_{};
};

}  // namespace ntl
