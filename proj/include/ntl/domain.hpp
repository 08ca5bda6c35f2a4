#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ntl/date.hpp"

namespace ntl {

/// One monthly meter reading: kWh consumed since the previous reading and the
/// number of days that span covers.
struct MeterReading {
  Date reading_date;
  double kwh_increase = 0.0;
  int days_since_prev = 1;

  friend bool operator==(const MeterReading&, const MeterReading&) = default;
};

struct ConsumptionSeries {
  std::string customer_id;
  std::vector<MeterReading> readings;  // ascending by date, one per calendar month

  friend bool operator==(const ConsumptionSeries&, const ConsumptionSeries&) = default;
};

struct InspectionResult {
  std::string customer_id;
  Date inspection_date;
  int label = 0;  // 1 = NTL detected

  friend bool operator==(const InspectionResult&, const InspectionResult&) = default;
};

struct Dataset {
  std::map<std::string, ConsumptionSeries> series;
  std::vector<InspectionResult> inspections;

  std::size_t positive_count() const;
  std::size_t negative_count() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct Violation {
  std::string customer_id;
  std::string message;

  std::string describe() const { return customer_id + ": " + message; }
  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Identifiers are restricted so they can be written to CSV unquoted.
bool is_valid_identifier(std::string_view id);

/// Checks every type invariant. Returns an empty list iff the dataset is well
/// formed; never throws for bad data.
std::vector<Violation> validate_dataset(const Dataset& dataset);

}  // namespace ntl
