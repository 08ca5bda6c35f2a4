#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "ntl/data.hpp"
#include "ntl/error.hpp"
#include "ntl/features.hpp"
#include "toys.hpp"

using ntl::Date;

namespace {

std::vector<double> constant(std::size_t n, double v) { return std::vector<double>(n, v); }

ntl::AttributeVector shipped_attributes(const std::vector<double>& daily) {
  const auto series = toy::monthly_series("c", 2011, 1, daily);
  const auto a = ntl::compute_attributes(series, Date(2012, 1, 3), ntl::AttributeCatalog::shipped());
  EXPECT_TRUE(a.has_value());
  return a.value_or(ntl::AttributeVector{});
}

}  // namespace

TEST(DailyAverage, SingleMonth) {
  ntl::ConsumptionSeries s{"c", {{Date(2011, 1, 31), 300.0, 30}}};
  const auto f = ntl::daily_average_features(s, 1, Date(2011, 2, 10));
  ASSERT_TRUE(f.has_value());
  EXPECT_EQ(*f, std::vector<double>{10.0});
}

TEST(DailyAverage, ZeroConsumption) {
  ntl::ConsumptionSeries s{"c", {{Date(2011, 1, 31), 0.0, 45}}};
  EXPECT_EQ(ntl::daily_average_features(s, 1, Date(2011, 2, 1)).value(), std::vector<double>{0.0});
}

TEST(DailyAverage, MissingMonthIsIncomplete) {
  auto s = toy::monthly_series("c", 2011, 1, constant(12, 5.0));
  EXPECT_TRUE(ntl::daily_average_features(s, 12, Date(2012, 1, 1)).has_value());
  s.readings.erase(s.readings.begin() + 4);
  EXPECT_FALSE(ntl::daily_average_features(s, 12, Date(2012, 1, 1)).has_value());
}

TEST(DailyAverage, WindowEndsBeforeAnchorMonth) {
  const auto s = toy::monthly_series("c", 2011, 1, {1, 2, 3, 4, 5});
  // The anchor's own month (April, value 4) is excluded.
  EXPECT_EQ(ntl::daily_average_features(s, 2, Date(2011, 4, 20)).value(), (std::vector<double>{2.0, 3.0}));
}

TEST(BuildFeatureMatrix, ExcludesIncompleteCustomers) {
  ntl::Dataset d;
  d.series["a"] = toy::monthly_series("a", 2011, 1, constant(12, 4.0));
  d.series["b"] = toy::monthly_series("b", 2011, 1, constant(12, 6.0));
  d.series["c"] = toy::monthly_series("c", 2011, 6, constant(7, 6.0));
  for (const char* id : {"a", "b", "c"}) d.inspections.push_back({id, Date(2012, 1, 5), 0});
  const auto built = ntl::build_feature_matrix(d, 12);
  EXPECT_EQ(built.features.rows(), 2u);
  EXPECT_EQ(built.features.customer_ids, (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(built.excluded.size(), 1u);
  EXPECT_EQ(built.excluded[0].customer_id, "c");
}

TEST(BuildFeatureMatrix, MostRecentInspectionLabels) {
  ntl::Dataset d;
  d.series["a"] = toy::monthly_series("a", 2011, 1, constant(14, 4.0));
  d.inspections.push_back({"a", Date(2012, 1, 5), 1});
  d.inspections.push_back({"a", Date(2012, 2, 5), 0});
  const auto built = ntl::build_feature_matrix(d, 12);
  ASSERT_EQ(built.targets.labels.size(), 1u);
  EXPECT_EQ(built.targets.labels[0], 0);
  EXPECT_EQ(built.anchors[0], Date(2012, 2, 5));
}

TEST(BuildFeatureMatrix, RowCountMatchesIndependentScan) {
  ntl::SynthConfig cfg;
  cfg.n_customers = 1000;
  cfg.seed = 42;
  const auto d = ntl::generate_synthetic(cfg);
  const auto built = ntl::build_feature_matrix(d, 12);

  std::map<std::string, ntl::InspectionResult> latest;
  for (const auto& i : d.inspections) {
    auto it = latest.find(i.customer_id);
    if (it == latest.end() || !(i.inspection_date < it->second.inspection_date)) latest[i.customer_id] = i;
  }
  std::size_t complete = 0;
  for (const auto& [id, insp] : latest) {
    std::set<int> months;
    for (const auto& r : d.series.at(id).readings) months.insert(r.reading_date.month_index());
    const int anchor = insp.inspection_date.month_index();
    bool ok = true;
    for (int m = anchor - 12; m < anchor; ++m) ok = ok && months.contains(m);
    complete += ok ? 1 : 0;
  }
  EXPECT_EQ(built.features.rows(), complete);
  for (double v : built.features.values) EXPECT_TRUE(std::isfinite(v));
}

TEST(BuildFeatureMatrix, DeterministicAndHomogeneous) {
  ntl::SynthConfig cfg;
  cfg.n_customers = 50;
  const auto d = ntl::generate_synthetic(cfg);
  const auto a = ntl::build_feature_matrix(d, 12);
  const auto b = ntl::build_feature_matrix(d, 12);
  EXPECT_EQ(a.features.values, b.features.values);
  EXPECT_EQ(a.features.customer_ids, b.features.customer_ids);

  auto scaled = d;
  for (auto& [id, s] : scaled.series)
    for (auto& r : s.readings) r.kwh_increase *= 2.5;
  const auto c = ntl::build_feature_matrix(scaled, 12);
  ASSERT_EQ(c.features.values.size(), a.features.values.size());
  for (std::size_t i = 0; i < a.features.values.size(); ++i)
    EXPECT_NEAR(c.features.values[i], 2.5 * a.features.values[i], 1e-9 * (1.0 + std::abs(a.features.values[i])));
}

TEST(Attributes, ConstantSeries) {
  const auto a = shipped_attributes(constant(12, 10.0));
  EXPECT_DOUBLE_EQ(a.at("mean_12m"), 10.0);
  EXPECT_DOUBLE_EQ(a.at("std_12m"), 0.0);
  EXPECT_DOUBLE_EQ(a.at("slope_12m"), 0.0);
  EXPECT_DOUBLE_EQ(a.at("change_3m"), 0.0);
  EXPECT_DOUBLE_EQ(a.at("min_over_mean"), 1.0);
  EXPECT_DOUBLE_EQ(a.at("zero_month_count"), 0.0);
}

TEST(Attributes, LinearRiseHasUnitSlope) {
  std::vector<double> daily;
  for (int i = 1; i <= 12; ++i) daily.push_back(i);
  // Least squares on (k, k + 1): sxy / sxx with both sums taken around 5.5.
  double sxy = 0.0, sxx = 0.0;
  for (int k = 0; k < 12; ++k) {
    sxy += (k - 5.5) * (k + 1 - 6.5);
    sxx += (k - 5.5) * (k - 5.5);
  }
  EXPECT_NEAR(shipped_attributes(daily).at("slope_12m"), sxy / sxx, 1e-12);
  EXPECT_NEAR(shipped_attributes(daily).at("slope_12m"), 1.0, 1e-12);
}

TEST(Attributes, RecentDropChange) {
  auto daily = constant(12, 10.0);
  daily[9] = daily[10] = daily[11] = 5.0;
  const auto a = shipped_attributes(daily);
  EXPECT_DOUBLE_EQ(a.at("change_3m"), -0.5);
  EXPECT_DOUBLE_EQ(a.at("min_over_mean"), 5.0 / 8.75);
}

TEST(Attributes, ZeroMonthsAndAllZero) {
  auto daily = constant(12, 0.0);
  const auto zero = shipped_attributes(daily);
  EXPECT_DOUBLE_EQ(zero.at("zero_month_count"), 12.0);
  EXPECT_DOUBLE_EQ(zero.at("min_over_mean"), 1.0);
  EXPECT_DOUBLE_EQ(zero.at("change_3m"), 0.0);
}

TEST(Attributes, ScaleBehaviour) {
  std::vector<double> daily{3, 9, 4, 7, 8, 2, 6, 5, 9, 1, 3, 2};
  std::vector<double> scaled;
  for (double v : daily) scaled.push_back(4.0 * v);
  const auto a = shipped_attributes(daily);
  const auto b = shipped_attributes(scaled);
  for (const char* k : {"mean_12m", "std_12m", "slope_12m"}) EXPECT_NEAR(b.at(k), 4.0 * a.at(k), 1e-12) << k;
  for (const char* k : {"change_3m", "min_over_mean"}) EXPECT_NEAR(b.at(k), a.at(k), 1e-12) << k;
}

TEST(Attributes, MissingNameThrows) {
  ntl::AttributeVector a;
  a.set("x", 1.0);
  EXPECT_THROW(a.at("y"), ntl::MissingAttributeError);
}

TEST(Catalog, JsonRoundTripAndValidation) {
  const auto shipped = ntl::AttributeCatalog::shipped();
  EXPECT_EQ(shipped.window(), 12u);
  EXPECT_EQ(ntl::AttributeCatalog::from_json(shipped.to_json()), shipped);
  EXPECT_THROW(ntl::AttributeCatalog::from_json(nlohmann::json::parse(R"([{"name":"a","definition_id":"nope"}])")),
               ntl::ConfigError);
  EXPECT_THROW(ntl::AttributeCatalog::from_json(nlohmann::json::parse(
                   R"([{"name":"a","definition_id":"mean"},{"name":"a","definition_id":"std"}])")),
               ntl::ConfigError);
  const auto custom = ntl::AttributeCatalog::from_json(
      nlohmann::json::parse(R"([{"name":"mean_6m","definition_id":"mean","params":{"months":6}}])"));
  EXPECT_EQ(custom.window(), 6u);
}
