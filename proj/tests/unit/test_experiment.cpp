#include <gtest/gtest.h>

#include <filesystem>

#include <nlohmann/json.hpp>

#include "ntl/data.hpp"
#include "ntl/error.hpp"
#include "ntl/experiment.hpp"

namespace {

nlohmann::json small_config(nlohmann::json classifiers, std::vector<double> levels) {
  return {{"synthetic", {{"n_customers", 600}, {"ntl_fraction", 0.2}, {"seed", 3}}},
          {"classifiers", std::move(classifiers)},
          {"levels", std::move(levels)},
          {"target_size", 200},
          {"folds", 3},
          {"master_seed", 17}};
}

std::size_t count_status(const nlohmann::json& cells, const std::string& status) {
  std::size_t n = 0;
  for (const auto& c : cells) n += c.at("status") == status ? 1 : 0;
  return n;
}

}  // namespace

TEST(Experiment, BooleanOnlyHasNoTrainingPhase) {
  const auto cfg = ntl::ExperimentConfig::from_json(small_config({{{"type", "boolean"}}}, {0.0, 0.2, 0.5}));
  const auto out = ntl::run_experiment(cfg);
  EXPECT_EQ(out.report.at("cells").size(), 3u);
  EXPECT_EQ(count_status(out.report.at("cells"), "ok"), 3u);
  EXPECT_TRUE(out.report.at("training").empty());
  EXPECT_TRUE(out.report.at("retests").empty());
  EXPECT_TRUE(out.models.empty());
  EXPECT_EQ(out.confusion_csvs.size(), 3u);
}

TEST(Experiment, ZeroLevelIsSkippedAndBestModelRetested) {
  const auto cfg = ntl::ExperimentConfig::from_json(small_config({{{"type", "svm"}}}, {0.0, 0.3, 0.5}));
  const auto out = ntl::run_experiment(cfg);
  const auto& training = out.report.at("training");
  ASSERT_EQ(training.size(), 3u);
  EXPECT_EQ(training[0].at("status"), "skipped");
  EXPECT_EQ(training[0].at("reason"), "skipped: untrainable (single-class sample)");
  EXPECT_EQ(training[1].at("status"), "ok");
  EXPECT_EQ(training[2].at("status"), "ok");

  const auto& selection = out.report.at("selection").at("svm");
  for (const char* how : {"by_test", "by_validation"}) {
    const double trained = selection.at(how).at("trained_level").get<double>();
    EXPECT_TRUE(trained == 0.3 || trained == 0.5);
  }
  // Each selection is re-tested at every level, including the skipped one.
  const auto& retests = out.report.at("retests");
  ASSERT_EQ(retests.size(), 6u);
  EXPECT_EQ(count_status(retests, "ok"), 6u);
  for (const auto& r : retests)
    if (r.at("level") == r.at("trained_level")) EXPECT_GT(r.at("excluded_training_examples").get<int>(), 0);
  EXPECT_EQ(out.models.size(), 2u);
  EXPECT_NE(out.curves_csv.find("svm_by_test"), std::string::npos);
  EXPECT_NE(out.curves_csv.find("svm_cv"), std::string::npos);
}

TEST(Experiment, ReportsAreDeterministicAcrossJobCounts) {
  auto cfg = ntl::ExperimentConfig::from_json(
      small_config({{{"type", "boolean"}}, {{"type", "fuzzy"}}, {{"type", "svm"}, {"svm", {{"epochs", 10}}}}},
                   {0.0, 0.1, 0.5, 1.0}));
  const auto a = ntl::run_experiment(cfg);
  cfg.jobs = 3;
  const auto b = ntl::run_experiment(cfg);
  EXPECT_EQ(ntl::strip_runtime(a.report).dump(), ntl::strip_runtime(b.report).dump());
  EXPECT_EQ(a.curves_csv, b.curves_csv);
  EXPECT_EQ(a.confusion_csvs, b.confusion_csvs);
}

TEST(Experiment, FuzzyMatchesBooleanAtHalfThreshold) {
  const auto cfg = ntl::ExperimentConfig::from_json(
      small_config({{{"type", "boolean"}}, {{"type", "fuzzy"}}}, {0.1, 0.5}));
  const auto out = ntl::run_experiment(cfg);
  const auto& cells = out.report.at("cells");
  ASSERT_EQ(cells.size(), 4u);
  EXPECT_EQ(cells[0].at("confusion"), cells[2].at("confusion"));
  EXPECT_EQ(cells[1].at("confusion"), cells[3].at("confusion"));
  const auto& census = out.report.at("classifiers")[1].at("membership_census");
  EXPECT_FALSE(census.empty());
}

TEST(Experiment, OversizedTargetIsCappedWithWarning) {
  auto j = small_config({{{"type", "boolean"}}}, {0.9});
  j["target_size"] = 5000;
  const auto out = ntl::run_experiment(ntl::ExperimentConfig::from_json(j));
  EXPECT_TRUE(out.report.at("levels")[0].at("capped").get<bool>());
  EXPECT_FALSE(out.report.at("warnings").empty());
  EXPECT_EQ(out.report.at("cells")[0].at("status"), "ok");
}

TEST(Experiment, StarvedLevelIsRecordedNotThrown) {
  // 200 * 0.01 = 2 positives cannot feed 3 folds.
  const auto out = ntl::run_experiment(
      ntl::ExperimentConfig::from_json(small_config({{{"type", "svm"}}}, {0.01, 0.5})));
  EXPECT_EQ(out.report.at("training")[0].at("status"), "error");
  EXPECT_EQ(out.report.at("training")[1].at("status"), "ok");
}

TEST(ExperimentConfig, ParsingAndValidation) {
  EXPECT_THROW(ntl::ExperimentConfig::from_json({{"classifiers", nlohmann::json::array()}, {"bogus", 1}}),
               ntl::ConfigError);
  EXPECT_THROW(ntl::ExperimentConfig::from_json(
                   {{"synthetic", nlohmann::json::object()}, {"classifiers", {{{"type", "perceptron"}}}}}),
               ntl::ConfigError);
  const auto defaults = ntl::ExperimentConfig::from_json(
      {{"synthetic", nlohmann::json::object()}, {"classifiers", {{{"type", "svm"}}}}});
  EXPECT_EQ(defaults.levels.size(), 17u);
  EXPECT_EQ(defaults.folds, 10u);
  EXPECT_EQ(defaults.window, 12u);
  EXPECT_EQ(defaults.classifiers[0].name, "svm");

  auto bad = defaults;
  bad.levels = {0.5, 1.5};
  EXPECT_THROW(bad.validate(), ntl::ConfigError);
  bad = defaults;
  bad.classifiers.clear();
  EXPECT_THROW(bad.validate(), ntl::ConfigError);

  const auto round = ntl::ExperimentConfig::from_json(defaults.to_json());
  EXPECT_EQ(round.to_json(), defaults.to_json());

  const auto rel = ntl::ExperimentConfig::from_json(
      {{"dataset", {{"consumption", "c.csv"}, {"inspections", "i.csv"}}}, {"classifiers", {{{"type", "boolean"}}}}},
      "/base");
  EXPECT_EQ(rel.consumption_path->generic_string(), "/base/c.csv");
}

TEST(Experiment, WriteOutputsLayout) {
  const auto dir = std::filesystem::temp_directory_path() / "ntl_test_experiment_out";
  std::filesystem::remove_all(dir);
  const auto out =
      ntl::run_experiment(ntl::ExperimentConfig::from_json(small_config({{{"type", "svm"}}}, {0.5})));
  ntl::write_outputs(out, dir);
  EXPECT_TRUE(std::filesystem::exists(dir / "report.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "curves.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "models" / "svm_0.5.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "confusion_svm_cv_0.5.csv"));
  const auto model = nlohmann::json::parse(ntl::read_text_file(dir / "models" / "svm_0.5.json"));
  EXPECT_EQ(model.at("type"), "svm");
  EXPECT_EQ(ntl::classifier_from_json(model)->type(), "svm");
}

TEST(StripRuntime, RemovesNestedKeys) {
  const nlohmann::json j{{"runtime_seconds", 1.0}, {"a", {{{"runtime_seconds", 2}, {"b", 3}}}}};
  EXPECT_EQ(ntl::strip_runtime(j), (nlohmann::json{{"a", {{{"b", 3}}}}}));
}
