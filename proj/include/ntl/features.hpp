#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ntl/domain.hpp"

namespace ntl {

inline constexpr std::size_t kDefaultWindow = 12;

/// M x N matrix of daily-average consumption (kWh/day), one row per customer,
/// oldest month first. Rows are stored contiguously.
struct FeatureMatrix {
  std::vector<std::string> customer_ids;
  std::size_t window = kDefaultWindow;
  std::vector<double> values;

  std::size_t rows() const { return customer_ids.size(); }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * window, window}; }
  std::span<double> row(std::size_t i) { return {values.data() + i * window, window}; }
};

struct TargetVector {
  std::vector<int> labels;
};

struct Exclusion {
  std::string customer_id;
  std::string reason;
};

struct FeatureBuild {
  FeatureMatrix features;
  TargetVector targets;
  std::vector<Date> anchors;  // inspection date used for each row
  std::vector<Exclusion> excluded;
};

/// Daily averages kwh_increase / days_since_prev for the `window` calendar
/// months immediately before the anchor's month, oldest first. Empty optional
/// when any of those months has no reading.
std::optional<std::vector<double>> daily_average_features(const ConsumptionSeries& series, std::size_t window,
                                                          Date anchor);

/// Most recent inspection per customer; later file position wins on equal dates.
std::map<std::string, InspectionResult> latest_inspections(const Dataset& dataset);

/// One row per inspected customer with a complete window before the most
/// recent inspection, in ascending customer_id order.
FeatureBuild build_feature_matrix(const Dataset& dataset, std::size_t window = kDefaultWindow);

// ---------------------------------------------------------------------------
// Attributes

struct AttributeDefinition {
  std::string name;
  std::string definition_id;  // mean, std, change, slope, min_over_mean, zero_count
  nlohmann::json params = nlohmann::json::object();

  friend bool operator==(const AttributeDefinition&, const AttributeDefinition&) = default;
};

/// Ordered, validated set of attribute definitions.
class AttributeCatalog {
 public:
  AttributeCatalog() = default;
  explicit AttributeCatalog(std::vector<AttributeDefinition> definitions);

  /// mean_12m, std_12m, change_3m, slope_12m, min_over_mean, zero_month_count.
  static AttributeCatalog shipped();
  static AttributeCatalog from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  const std::vector<AttributeDefinition>& definitions() const { return definitions_; }
  std::vector<std::string> names() const;
  bool contains(std::string_view name) const;
  bool empty() const { return definitions_.empty(); }

  /// Number of trailing months the catalog needs.
  std::size_t window() const { return window_; }

  friend bool operator==(const AttributeCatalog&, const AttributeCatalog&) = default;

 private:
  std::vector<AttributeDefinition> definitions_;
  std::size_t window_ = 0;
};

/// Named attribute values in catalog order.
class AttributeVector {
 public:
  void set(std::string name, double value);
  std::optional<double> find(std::string_view name) const;
  /// Throws MissingAttributeError.
  double at(std::string_view name) const;

  const std::vector<std::string>& names() const { return names_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return names_.size(); }

  friend bool operator==(const AttributeVector&, const AttributeVector&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<double> values_;
};

/// Evaluates the catalog on a daily-average sequence of exactly
/// catalog.window() values (oldest first).
AttributeVector attributes_from_daily(std::span<const double> daily, const AttributeCatalog& catalog);

std::optional<AttributeVector> compute_attributes(const ConsumptionSeries& series, Date anchor,
                                                  const AttributeCatalog& catalog);

}  // namespace ntl
