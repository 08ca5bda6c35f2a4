#include "ntl/classifier.hpp"

#include <algorithm>
#include <stdexcept>

#include "ntl/error.hpp"

namespace ntl {

std::size_t ExamplePool::positives() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

namespace {

void append(ExamplePool& pool, const std::string& id, const std::vector<double>& row, AttributeVector attrs) {
  pool.customer_ids.push_back(id);
  pool.features.customer_ids.push_back(id);
  pool.features.values.insert(pool.features.values.end(), row.begin(), row.end());
  pool.attributes.push_back(std::move(attrs));
}

}  // namespace

ExamplePool build_pool(const Dataset& dataset, std::size_t window, const AttributeCatalog& catalog) {
  const auto built = build_feature_matrix(dataset, window);
  ExamplePool pool;
  pool.features.window = window;
  pool.attribute_names = catalog.names();
  pool.excluded = built.excluded;
  for (std::size_t i = 0; i < built.features.rows(); ++i) {
    const auto& id = built.features.customer_ids[i];
    auto attrs = compute_attributes(dataset.series.at(id), built.anchors[i], catalog);
    if (!attrs) {
      pool.excluded.push_back({id, "incomplete " + std::to_string(catalog.window()) + "-month attribute window"});
      continue;
    }
    const auto row = built.features.row(i);
    append(pool, id, std::vector<double>(row.begin(), row.end()), std::move(*attrs));
    pool.labels.push_back(built.targets.labels[i]);
  }
  std::sort(pool.excluded.begin(), pool.excluded.end(),
            [](const Exclusion& a, const Exclusion& b) { return a.customer_id < b.customer_id; });
  return pool;
}

ExamplePool build_scoring_pool(const Dataset& dataset, std::size_t window, const AttributeCatalog& catalog,
                               bool uninspected_only) {
  const auto latest = latest_inspections(dataset);
  ExamplePool pool;
  pool.features.window = window;
  pool.attribute_names = catalog.names();
  for (const auto& [id, series] : dataset.series) {
    if (uninspected_only && latest.contains(id)) continue;
    if (series.readings.empty()) {
      pool.excluded.push_back({id, "no readings"});
      continue;
    }
    const Date anchor = Date::first_of_month(series.readings.back().reading_date.month_index() + 1);
    auto row = daily_average_features(series, window, anchor);
    auto attrs = compute_attributes(series, anchor, catalog);
    if (!row || !attrs) {
      pool.excluded.push_back({id, "incomplete window before " + anchor.iso()});
      continue;
    }
    append(pool, id, *row, std::move(*attrs));
  }
  return pool;
}

FeatureMatrix select_rows(const FeatureMatrix& features, std::span<const std::size_t> ids) {
  FeatureMatrix out;
  out.window = features.window;
  out.values.reserve(ids.size() * features.window);
  for (std::size_t id : ids) {
    out.customer_ids.push_back(features.customer_ids[id]);
    const auto r = features.row(id);
    out.values.insert(out.values.end(), r.begin(), r.end());
  }
  return out;
}

std::vector<int> Classifier::predict(const ExamplePool& pool, std::span<const std::size_t> ids) const {
  const auto s = scores(pool, ids);
  std::vector<int> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = decide(s[i]);
  return out;
}

// ---------------------------------------------------------------------------

BooleanClassifier::BooleanClassifier(RuleSet rules, AttributeCatalog catalog)
    : rules_(std::move(rules)), catalog_(std::move(catalog)) {}

std::vector<double> BooleanClassifier::scores(const ExamplePool& pool, std::span<const std::size_t> ids) const {
  std::vector<double> out;
  out.reserve(ids.size());
  for (std::size_t id : ids) out.push_back(static_cast<double>(classify_boolean(rules_, pool.attributes[id]).fired.size()));
  return out;
}

nlohmann::json BooleanClassifier::to_json() const {
  return {{"type", "boolean"}, {"rules", print_rules(rules_)}, {"catalog", catalog_.to_json()}};
}

FuzzyClassifier::FuzzyClassifier(FuzzySystem system, double threshold, AttributeCatalog catalog)
    : system_(std::move(system)), threshold_(threshold), catalog_(std::move(catalog)),
      engine_(system_, catalog_.names()) {
  if (!(threshold_ > 0.0 && threshold_ < 1.0)) throw ConfigError("fuzzy threshold must lie in (0, 1)");
}

std::vector<double> FuzzyClassifier::scores(const ExamplePool& pool, std::span<const std::size_t> ids) const {
  std::vector<double> out;
  out.reserve(ids.size());
  const bool aligned = pool.attribute_names == catalog_.names();
  for (std::size_t id : ids) {
    const auto& attrs = pool.attributes[id];
    out.push_back(aligned ? engine_.score(attrs.values()) : mamdani_infer(system_, attrs));
  }
  return out;
}

nlohmann::json FuzzyClassifier::to_json() const {
  return {{"type", "fuzzy"}, {"threshold", threshold_}, {"system", system_}, {"catalog", catalog_.to_json()}};
}

std::vector<double> SvmClassifier::scores(const ExamplePool& pool, std::span<const std::size_t> ids) const {
  std::vector<double> out;
  out.reserve(ids.size());
  for (std::size_t id : ids) out.push_back(model_.decision(pool.features.row(id)));
  return out;
}

nlohmann::json SvmClassifier::to_json() const { return model_; }

std::shared_ptr<const Classifier> classifier_from_json(const nlohmann::json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "svm") return std::make_shared<SvmClassifier>(j.get<SvmModel>());
  const auto catalog = catalog_of(j);
  if (type == "boolean")
    return std::make_shared<BooleanClassifier>(parse_rules(j.at("rules").get<std::string>(), catalog), catalog);
  if (type == "fuzzy")
    return std::make_shared<FuzzyClassifier>(j.at("system").get<FuzzySystem>(), j.value("threshold", 0.5), catalog);
  throw ConfigError("unknown model type '" + type + "'");
}

AttributeCatalog catalog_of(const nlohmann::json& model_json) {
  if (model_json.contains("catalog")) return AttributeCatalog::from_json(model_json.at("catalog"));
  return AttributeCatalog::shipped();
}

}  // namespace ntl
