#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ntl/classifier.hpp"
#include "ntl/metrics.hpp"

namespace ntl {

struct SplitRatios {
  double train = 0.6;
  double validation = 0.2;
  double test = 0.2;

  void validate() const;
};

/// Positions into the labels span handed to stratified_split.
struct Split {
  std::vector<std::size_t> train, validation, test;
};

/// Seeded shuffle into train/validation/test with the requested ratios. Part
/// sizes are round(n * ratio) (test takes the remainder) and every part keeps
/// the class fraction to within one example.
Split stratified_split(std::span<const int> labels, const SplitRatios& ratios, std::uint64_t seed);

/// Fits a classifier on pool example ids; the validation ids are available
/// for the trainer's own model selection.
using Trainer = std::function<std::shared_ptr<const Classifier>(
    std::span<const std::size_t> train, std::span<const std::size_t> validation, std::uint64_t seed)>;

struct FoldReport {
  std::size_t fold = 0;
  std::size_t train_size = 0, validation_size = 0, test_size = 0;
  MetricReport validation;
  MetricReport test;
  ConfusionMatrix test_confusion;
};

struct CrossValidationResult {
  std::shared_ptr<const Classifier> best;
  std::size_t selected_fold = 0;
  std::vector<FoldReport> folds;
  Split selected_split;  // pool example ids

  const FoldReport& selected() const { return folds[selected_fold]; }
};

struct CrossValidationConfig {
  std::size_t folds = 10;
  SplitRatios ratios;
  std::uint64_t seed = 0;
};

/// Repeated stratified 60/20/20 shuffles; picks the fold with the highest
/// validation AUC (ties: lowest fold index). Throws ClassStarvedError unless
/// each class has at least `folds` examples.
CrossValidationResult cross_validate(const ExamplePool& pool, std::span<const std::size_t> sample,
                                     const Trainer& trainer, const CrossValidationConfig& config);

void to_json(nlohmann::json& j, const FoldReport& f);

}  // namespace ntl
