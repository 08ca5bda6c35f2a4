#include "ntl/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>

#include "ntl/error.hpp"

namespace ntl {

std::optional<std::vector<double>> daily_average_features(const ConsumptionSeries& series, std::size_t window,
                                                          Date anchor) {
  const int last = anchor.month_index() - 1;
  const int first = last - static_cast<int>(window) + 1;
  std::vector<double> out(window, 0.0);
  std::vector<char> seen(window, 0);
  for (const auto& r : series.readings) {
    const int m = r.reading_date.month_index();
    if (m < first || m > last) continue;
    const auto slot = static_cast<std::size_t>(m - first);
    out[slot] = r.kwh_increase / static_cast<double>(r.days_since_prev);
    seen[slot] = 1;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) return std::nullopt;
  return out;
}

std::map<std::string, InspectionResult> latest_inspections(const Dataset& dataset) {
  std::map<std::string, InspectionResult> latest;
  for (const auto& insp : dataset.inspections) {
    auto [it, inserted] = latest.try_emplace(insp.customer_id, insp);
    if (!inserted && insp.inspection_date >= it->second.inspection_date) it->second = insp;
  }
  return latest;
}

FeatureBuild build_feature_matrix(const Dataset& dataset, std::size_t window) {
  if (window == 0) throw ConfigError("feature window must be at least one month");
  FeatureBuild out;
  out.features.window = window;
  const auto latest = latest_inspections(dataset);
  for (const auto& [id, series] : dataset.series) {
    const auto it = latest.find(id);
    if (it == latest.end()) {
      out.excluded.push_back({id, "no inspection"});
      continue;
    }
    auto row = daily_average_features(series, window, it->second.inspection_date);
    if (!row) {
      out.excluded.push_back({id, "incomplete " + std::to_string(window) + "-month window before " +
                                      it->second.inspection_date.iso()});
      continue;
    }
    out.features.customer_ids.push_back(id);
    out.features.values.insert(out.features.values.end(), row->begin(), row->end());
    out.targets.labels.push_back(it->second.label);
    out.anchors.push_back(it->second.inspection_date);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

const std::set<std::string, std::less<>> kDefinitionIds{"mean",  "std",           "change",
                                                        "slope", "min_over_mean", "zero_count"};

bool is_attribute_name(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::size_t positive_param(const AttributeDefinition& d, const char* key, std::size_t fallback) {
  if (!d.params.contains(key)) return fallback;
  const auto& v = d.params.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 1)
    throw ConfigError("attribute '" + d.name + "': parameter '" + key + "' must be a positive integer");
  return v.get<std::size_t>();
}

std::size_t months_needed(const AttributeDefinition& d) {
  if (d.definition_id == "change") return positive_param(d, "recent", 3) + positive_param(d, "prior", 9);
  return positive_param(d, "months", 12);
}

double mean_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double evaluate(const AttributeDefinition& d, std::span<const double> daily) {
  const std::size_t need = months_needed(d);
  const auto tail = daily.subspan(daily.size() - need);
  const std::string& id = d.definition_id;
  if (id == "mean") return mean_of(tail);
  if (id == "std") {
    const double m = mean_of(tail);
    double ss = 0.0;
    for (double x : tail) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(tail.size()));
  }
  if (id == "change") {
    const std::size_t recent = positive_param(d, "recent", 3);
    const double prior_mean = mean_of(tail.first(need - recent));
    const double recent_mean = mean_of(tail.last(recent));
    if (prior_mean == 0.0) return recent_mean == 0.0 ? 0.0 : 1.0;
    return (recent_mean - prior_mean) / prior_mean;
  }
  if (id == "slope") {
    const double n = static_cast<double>(tail.size());
    if (tail.size() < 2) return 0.0;
    const double xbar = (n - 1.0) / 2.0;
    const double ybar = mean_of(tail);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < tail.size(); ++i) {
      const double dx = static_cast<double>(i) - xbar;
      sxy += dx * (tail[i] - ybar);
      sxx += dx * dx;
    }
    return sxy / sxx;
  }
  if (id == "min_over_mean") {
    const double m = mean_of(tail);
    if (m == 0.0) return 1.0;
    return *std::min_element(tail.begin(), tail.end()) / m;
  }
  // zero_count
  return static_cast<double>(std::count(tail.begin(), tail.end(), 0.0));
}

}  // namespace

AttributeCatalog::AttributeCatalog(std::vector<AttributeDefinition> definitions)
    : definitions_(std::move(definitions)) {
  std::set<std::string, std::less<>> seen;
  for (const auto& d : definitions_) {
    if (!is_attribute_name(d.name)) throw ConfigError("invalid attribute name '" + d.name + "'");
    if (!seen.insert(d.name).second) throw ConfigError("duplicate attribute name '" + d.name + "'");
    if (!kDefinitionIds.contains(d.definition_id))
      throw ConfigError("attribute '" + d.name + "': unknown definition_id '" + d.definition_id + "'");
    if (!d.params.is_object()) throw ConfigError("attribute '" + d.name + "': params must be an object");
    window_ = std::max(window_, months_needed(d));
  }
}

AttributeCatalog AttributeCatalog::shipped() {
  using nlohmann::json;
  return AttributeCatalog({
      {"mean_12m", "mean", json{{"months", 12}}},
      {"std_12m", "std", json{{"months", 12}}},
      {"change_3m", "change", json{{"recent", 3}, {"prior", 9}}},
      {"slope_12m", "slope", json{{"months", 12}}},
      {"min_over_mean", "min_over_mean", json{{"months", 12}}},
      {"zero_month_count", "zero_count", json{{"months", 12}}},
  });
}

AttributeCatalog AttributeCatalog::from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ConfigError("attribute catalog must be a JSON list");
  std::vector<AttributeDefinition> defs;
  for (const auto& e : j) {
    AttributeDefinition d;
    d.name = e.at("name").get<std::string>();
    d.definition_id = e.at("definition_id").get<std::string>();
    d.params = e.value("params", nlohmann::json::object());
    defs.push_back(std::move(d));
  }
  return AttributeCatalog(std::move(defs));
}

nlohmann::json AttributeCatalog::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& d : definitions_)
    j.push_back({{"name", d.name}, {"definition_id", d.definition_id}, {"params", d.params}});
  return j;
}

std::vector<std::string> AttributeCatalog::names() const {
  std::vector<std::string> out;
  for (const auto& d : definitions_) out.push_back(d.name);
  return out;
}

bool AttributeCatalog::contains(std::string_view name) const {
  return std::any_of(definitions_.begin(), definitions_.end(), [&](const auto& d) { return d.name == name; });
}

void AttributeVector::set(std::string name, double value) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) {
      values_[i] = value;
      return;
    }
  }
  names_.push_back(std::move(name));
  values_.push_back(value);
}

std::optional<double> AttributeVector::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return values_[i];
  return std::nullopt;
}

double AttributeVector::at(std::string_view name) const {
  if (auto v = find(name)) return *v;
  throw MissingAttributeError(std::string(name));
}

AttributeVector attributes_from_daily(std::span<const double> daily, const AttributeCatalog& catalog) {
  if (catalog.empty()) throw ConfigError("attribute catalog is empty");
  if (daily.size() != catalog.window())
    throw Error("attribute computation needs " + std::to_string(catalog.window()) + " monthly values, got " +
                std::to_string(daily.size()));
  AttributeVector out;
  for (const auto& d : catalog.definitions()) out.set(d.name, evaluate(d, daily));
  return out;
}

std::optional<AttributeVector> compute_attributes(const ConsumptionSeries& series, Date anchor,
                                                  const AttributeCatalog& catalog) {
  if (catalog.empty()) throw ConfigError("attribute catalog is empty");
  auto daily = daily_average_features(series, catalog.window(), anchor);
  if (!daily) return std::nullopt;
  return attributes_from_daily(*daily, catalog);
}

}  // namespace ntl
