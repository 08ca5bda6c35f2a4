#include <gtest/gtest.h>

#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "ntl/metrics.hpp"
#include "ntl/random.hpp"
#include "oracles.hpp"

TEST(Confusion, PerfectPredictions) {
  const std::vector<int> v{1, 0, 1, 0};
  EXPECT_EQ(ntl::confusion(v, v), (ntl::ConfusionMatrix{2, 2, 0, 0}));
}

TEST(Confusion, AllNegativePredictorOnImbalancedLabels) {
  std::vector<int> labels(1000, 0);
  for (int i = 0; i < 10; ++i) labels[i * 97] = 1;
  const std::vector<int> preds(1000, 0);
  const auto m = ntl::metrics(ntl::confusion(preds, labels));
  EXPECT_DOUBLE_EQ(m.accuracy, 0.99);
  EXPECT_EQ(m.recall.value(), 0.0);
  EXPECT_EQ(m.specificity.value(), 1.0);
  EXPECT_EQ(m.auc.value(), 0.5);
}

TEST(Confusion, ComplementPredictions) {
  const std::vector<int> labels{1, 0, 0, 1, 1};
  const std::vector<int> preds{0, 1, 1, 0, 0};
  const auto n = ntl::confusion(preds, labels).normalized();
  EXPECT_EQ(n.tpr.value(), 0.0);
  EXPECT_EQ(n.tnr.value(), 0.0);
  EXPECT_EQ(n.fpr.value(), 1.0);
  EXPECT_EQ(n.fnr.value(), 1.0);
}

TEST(Confusion, RejectsBadInput) {
  const std::vector<int> a{0, 1}, b{0}, c{0, 2};
  EXPECT_THROW(ntl::confusion(a, b), std::invalid_argument);
  EXPECT_THROW(ntl::confusion(std::vector<int>{}, std::vector<int>{}), std::invalid_argument);
  EXPECT_THROW(ntl::confusion(a, c), std::invalid_argument);
}

TEST(Metrics, TablePoints) {
  EXPECT_EQ(ntl::single_point_auc(0.40, 0.53), 0.465);
  EXPECT_EQ(ntl::single_point_auc(0.75, 0.35), 0.55);
  EXPECT_EQ(ntl::single_point_auc(1.0, 1.0), 1.0);
}

TEST(Metrics, SingleClassRatesAreUndefined) {
  const std::vector<int> labels(5, 0);
  const std::vector<int> preds{0, 1, 0, 0, 0};
  const auto m = ntl::metrics(ntl::confusion(preds, labels));
  EXPECT_DOUBLE_EQ(m.accuracy, 0.8);
  EXPECT_FALSE(m.recall.has_value());
  EXPECT_DOUBLE_EQ(m.specificity.value(), 0.8);
  EXPECT_FALSE(m.defined());
  const nlohmann::json j = m;
  EXPECT_TRUE(j.at("auc").is_null());
}

TEST(Metrics, AgreesWithRecountOracle) {
  ntl::Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = static_cast<std::size_t>(1 + rng.below(1000));
    std::vector<int> p(n), l(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = static_cast<int>(rng.below(2));
      l[i] = static_cast<int>(rng.below(2));
    }
    const auto cm = ntl::confusion(p, l);
    const auto o = oracle::recount(p, l);
    ASSERT_EQ(cm, (ntl::ConfusionMatrix{o.tp, o.tn, o.fp, o.fn}));
    const auto m = ntl::metrics(cm);
    EXPECT_DOUBLE_EQ(m.accuracy, static_cast<double>(o.tp + o.tn) / static_cast<double>(n));
    if (o.tp + o.fn > 0 && o.tn + o.fp > 0) {
      const double tpr = static_cast<double>(o.tp) / static_cast<double>(o.tp + o.fn);
      const double fpr = static_cast<double>(o.fp) / static_cast<double>(o.tn + o.fp);
      ASSERT_TRUE(m.auc.has_value());
      EXPECT_NEAR(*m.auc, oracle::two_segment_roc_area(fpr, tpr), 1e-12);
      EXPECT_GE(*m.auc, 0.0);
      EXPECT_LE(*m.auc, 1.0);
    }
  }
}

TEST(Metrics, RandomGuessLineGivesHalf) {
  for (double r : {0.0, 0.1, 0.37, 0.5, 0.9, 1.0}) EXPECT_DOUBLE_EQ(ntl::single_point_auc(r, 1.0 - r), 0.5);
}
