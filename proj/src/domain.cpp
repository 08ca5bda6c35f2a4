#include "ntl/domain.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace ntl {

std::size_t Dataset::positive_count() const {
  return static_cast<std::size_t>(
      std::count_if(inspections.begin(), inspections.end(), [](const auto& i) { return i.label == 1; }));
}

std::size_t Dataset::negative_count() const {
  return static_cast<std::size_t>(
      std::count_if(inspections.begin(), inspections.end(), [](const auto& i) { return i.label == 0; }));
}

bool is_valid_identifier(std::string_view id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
  });
}

std::vector<Violation> validate_dataset(const Dataset& dataset) {
  std::vector<Violation> out;
  auto add = [&](const std::string& id, std::string msg) { out.push_back({id, std::move(msg)}); };

  for (const auto& [key, series] : dataset.series) {
    if (series.customer_id != key)
      add(key, "series keyed under '" + key + "' carries customer_id '" + series.customer_id + "'");
    if (!is_valid_identifier(key)) add(key, "customer_id must match [A-Za-z0-9_-]+");

    std::set<int> months;
    for (std::size_t i = 0; i < series.readings.size(); ++i) {
      const MeterReading& r = series.readings[i];
      const std::string where = "reading " + r.reading_date.iso();
      if (!std::isfinite(r.kwh_increase) || r.kwh_increase < 0.0)
        add(key, where + ": kwh_increase must be finite and >= 0");
      if (r.days_since_prev < 1) add(key, where + ": days_since_prev must be >= 1");
      if (!months.insert(r.reading_date.month_index()).second) {
        add(key, "duplicate reading month " + r.reading_date.iso().substr(0, 7));
        continue;
      }
      if (i > 0) {
        const Date prev = series.readings[i - 1].reading_date;
        if (r.reading_date <= prev) {
          add(key, where + ": reading dates must strictly increase");
        } else if (days_between(prev, r.reading_date) != r.days_since_prev) {
          add(key, where + ": days_since_prev " + std::to_string(r.days_since_prev) +
                       " does not match the calendar gap of " +
                       std::to_string(days_between(prev, r.reading_date)) + " days");
        }
      }
    }
  }

  for (const auto& insp : dataset.inspections) {
    if (!dataset.series.contains(insp.customer_id))
      add(insp.customer_id, "inspection on " + insp.inspection_date.iso() + " references an unknown customer");
    if (insp.label != 0 && insp.label != 1)
      add(insp.customer_id, "inspection label must be 0 or 1, got " + std::to_string(insp.label));
  }
  return out;
}

}  // namespace ntl
