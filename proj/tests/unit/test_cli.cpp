#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ntl/cli.hpp"
#include "ntl/data.hpp"
#include "ntl/experiment.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = ntl::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ntl_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

/// Small synthetic dataset written under dir/data.
fs::path generated(const fs::path& dir, int customers = 300) {
  const auto r = cli({"gen", "--out", (dir / "data").string(), "--customers", std::to_string(customers),
                      "--ntl-fraction", "0.2", "--seed", "4"});
  EXPECT_EQ(r.code, ntl::cli::kExitOk) << r.err;
  return dir / "data";
}

std::string sorted_listing(const fs::path& dir) {
  std::vector<std::string> names;
  for (const auto& e : fs::recursive_directory_iterator(dir)) names.push_back(fs::relative(e.path(), dir).string());
  std::sort(names.begin(), names.end());
  std::string out;
  for (const auto& n : names) out += n + "\n";
  return out;
}

}  // namespace

TEST(Cli, UnknownFlagIsUsageError) {
  const std::string config = std::string(NTL_SOURCE_DIR) + "/data/example.rules";  // any existing file
  const auto r = cli({"sweep", "--config", config, "--frobnicate"});
  EXPECT_EQ(r.code, ntl::cli::kExitUsage);
  EXPECT_NE(r.err.find("frobnicate"), std::string::npos);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_EQ(cli({}).code, ntl::cli::kExitUsage);
  EXPECT_EQ(cli({"bogus"}).code, ntl::cli::kExitUsage);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(cli({"--help"}).code, ntl::cli::kExitOk); }

TEST(Cli, ValidateGoodAndCorruptData) {
  const auto dir = scratch("validate");
  const auto data = generated(dir);
  const auto ok = cli({"validate", "--consumption", (data / "consumption.csv").string(), "--inspections",
                       (data / "inspections.csv").string()});
  EXPECT_EQ(ok.code, ntl::cli::kExitOk) << ok.err;
  EXPECT_NE(ok.out.find("300 customers"), std::string::npos);

  ntl::write_text_file(dir / "bad_i.csv", std::string(ntl::kInspectionsHeader) + "\nnobody,2012-01-01,1\nghost,2012-01-01,0\n");
  const auto bad = cli({"validate", "--consumption", (data / "consumption.csv").string(), "--inspections",
                        (dir / "bad_i.csv").string()});
  EXPECT_EQ(bad.code, ntl::cli::kExitData);
  EXPECT_NE(bad.err.find("nobody"), std::string::npos);
  EXPECT_NE(bad.err.find("ghost"), std::string::npos);

  ntl::write_text_file(dir / "bad_c.csv", std::string(ntl::kConsumptionHeader) + "\nc1,2011-01-15,-3,30\n");
  const auto neg = cli({"validate", "--consumption", (dir / "bad_c.csv").string(), "--inspections",
                        (data / "inspections.csv").string()});
  EXPECT_EQ(neg.code, ntl::cli::kExitData);
  EXPECT_NE(neg.err.find("line 2"), std::string::npos);
}

TEST(Cli, SweepWritesReportAndIsReproducible) {
  const auto dir = scratch("sweep");
  ntl::write_text_file(dir / "cfg.json", R"({
    "synthetic": {"n_customers": 400, "ntl_fraction": 0.2, "seed": 2},
    "classifiers": [{"type": "boolean"}, {"type": "svm", "svm": {"epochs": 5}}],
    "levels": [0, 0.2, 0.5], "target_size": 150, "folds": 3, "master_seed": 1})");
  const auto a = cli({"sweep", "--config", (dir / "cfg.json").string(), "--out", (dir / "run1").string()});
  ASSERT_EQ(a.code, ntl::cli::kExitOk) << a.err;
  EXPECT_TRUE(fs::exists(dir / "run1" / "report.json"));
  const auto b = cli({"sweep", "--config", (dir / "cfg.json").string(), "--out", (dir / "run2").string(), "--jobs",
                      "2"});
  ASSERT_EQ(b.code, ntl::cli::kExitOk) << b.err;
  const auto ra = nlohmann::json::parse(ntl::read_text_file(dir / "run1" / "report.json"));
  const auto rb = nlohmann::json::parse(ntl::read_text_file(dir / "run2" / "report.json"));
  EXPECT_EQ(ntl::strip_runtime(ra).dump(), ntl::strip_runtime(rb).dump());
  EXPECT_EQ(sorted_listing(dir / "run1"), sorted_listing(dir / "run2"));
  EXPECT_EQ(ntl::read_text_file(dir / "run1" / "curves.csv"), ntl::read_text_file(dir / "run2" / "curves.csv"));
}

TEST(Cli, SeedFlagOverridesConfig) {
  const auto dir = scratch("seed");
  ntl::write_text_file(dir / "cfg.json", R"({
    "synthetic": {"n_customers": 200, "ntl_fraction": 0.3, "seed": 2},
    "classifiers": [{"type": "boolean"}], "levels": [0.3], "target_size": 100, "master_seed": 1})");
  ASSERT_EQ(cli({"sweep", "--config", (dir / "cfg.json").string(), "--out", (dir / "r").string(), "--seed", "99"}).code,
            0);
  const auto report = nlohmann::json::parse(ntl::read_text_file(dir / "r" / "report.json"));
  EXPECT_EQ(report.at("master_seed"), 99);
}

TEST(Cli, FeaturesTrainScoreEvaluatePipeline) {
  const auto dir = scratch("pipeline");
  const auto data = generated(dir, 400);
  const std::vector<std::string> ds{"--consumption", (data / "consumption.csv").string(), "--inspections",
                                    (data / "inspections.csv").string()};
  auto with = [&](std::vector<std::string> head, std::vector<std::string> tail) {
    head.insert(head.end(), ds.begin(), ds.end());
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  };

  const auto inputs_before = ntl::read_text_file(data / "consumption.csv");
  auto r = cli(with({"features"}, {"--out", (dir / "feat").string()}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "feat" / "features.csv"));
  EXPECT_TRUE(fs::exists(dir / "feat" / "attributes.csv"));

  r = cli(with({"train"}, {"--classifier", "svm", "--folds", "3", "--seed", "5", "--out", (dir / "svm").string()}));
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_TRUE(fs::exists(dir / "svm" / "model.json"));

  r = cli(with({"score"}, {"--model", (dir / "svm" / "model.json").string(), "--all", "--out", (dir / "scores").string()}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "scores" / "scores.csv"));

  r = cli(with({"evaluate"}, {"--model", (dir / "svm" / "model.json").string(), "--levels", "0.1,0.5",
                              "--target-size", "100", "--out", (dir / "eval").string()}));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ev = nlohmann::json::parse(ntl::read_text_file(dir / "eval" / "evaluation.json"));
  EXPECT_FALSE(ev.empty());

  r = cli(with({"train"}, {"--classifier", "boolean", "--out", (dir / "bool").string()}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(ntl::read_text_file(dir / "bool" / "model.json")).at("type"), "boolean");

  EXPECT_EQ(ntl::read_text_file(data / "consumption.csv"), inputs_before);
}

TEST(Cli, BadLevelsAndMissingFiles) {
  const auto dir = scratch("bad");
  const auto data = generated(dir);
  const auto r = cli({"evaluate", "--model", (data / "synth_config.json").string(), "--consumption",
                      (data / "consumption.csv").string(), "--inspections", (data / "inspections.csv").string(),
                      "--levels", "0.1,x", "--out", (dir / "e").string()});
  EXPECT_EQ(r.code, ntl::cli::kExitUsage);
  EXPECT_EQ(cli({"validate", "--consumption", "/nonexistent.csv", "--inspections", "/nonexistent2.csv"}).code,
            ntl::cli::kExitData);
}

TEST(Cli, BinaryExitCodes) {
  const std::string bin = NTL_CLI;
  EXPECT_EQ(std::system((bin + " --frobnicate > /dev/null 2>&1").c_str()) >> 8, 1);
  EXPECT_EQ(std::system((bin + " --help > /dev/null 2>&1").c_str()) >> 8, 0);
  EXPECT_EQ(std::system((bin + " validate --consumption /nonexistent.csv --inspections /x.csv > /dev/null 2>&1").c_str()) >> 8, 2);
}
