#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ntl/features.hpp"
#include "ntl/fuzzy.hpp"
#include "ntl/rules.hpp"
#include "ntl/svm.hpp"

namespace ntl {

/// Customers that can be scored: daily-average feature rows and catalog
/// attributes side by side, indexed by example id.
struct ExamplePool {
  std::vector<std::string> customer_ids;
  std::vector<int> labels;  // empty for unlabeled pools
  FeatureMatrix features;
  std::vector<AttributeVector> attributes;
  std::vector<std::string> attribute_names;
  std::vector<Exclusion> excluded;

  std::size_t size() const { return customer_ids.size(); }
  std::size_t positives() const;
};

/// Labeled pool from each customer's most recent inspection. Customers need a
/// complete window for both the feature matrix and the catalog.
ExamplePool build_pool(const Dataset& dataset, std::size_t window, const AttributeCatalog& catalog);

/// Unlabeled pool anchored on the month after each customer's last reading.
/// With `uninspected_only`, customers that have any inspection are skipped.
ExamplePool build_scoring_pool(const Dataset& dataset, std::size_t window, const AttributeCatalog& catalog,
                               bool uninspected_only);

FeatureMatrix select_rows(const FeatureMatrix& features, std::span<const std::size_t> ids);

/// A trained or hand-written decision procedure over pool examples.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual std::string type() const = 0;
  /// Higher means more likely NTL.
  virtual std::vector<double> scores(const ExamplePool& pool, std::span<const std::size_t> ids) const = 0;
  virtual int decide(double score) const = 0;
  virtual nlohmann::json to_json() const = 0;

  std::vector<int> predict(const ExamplePool& pool, std::span<const std::size_t> ids) const;
};

/// Score = number of fired rules; label 1 when any rule fires.
class BooleanClassifier final : public Classifier {
 public:
  BooleanClassifier(RuleSet rules, AttributeCatalog catalog);

  std::string type() const override { return "boolean"; }
  std::vector<double> scores(const ExamplePool& pool, std::span<const std::size_t> ids) const override;
  int decide(double score) const override { return score > 0.0 ? 1 : 0; }
  nlohmann::json to_json() const override;

  const RuleSet& rules() const { return rules_; }

 private:
  RuleSet rules_;
  AttributeCatalog catalog_;
};

class FuzzyClassifier final : public Classifier {
 public:
  FuzzyClassifier(FuzzySystem system, double threshold, AttributeCatalog catalog);

  std::string type() const override { return "fuzzy"; }
  std::vector<double> scores(const ExamplePool& pool, std::span<const std::size_t> ids) const override;
  int decide(double score) const override { return score > threshold_ ? 1 : 0; }
  nlohmann::json to_json() const override;

  const FuzzySystem& system() const { return system_; }

 private:
  FuzzySystem system_;
  double threshold_;
  AttributeCatalog catalog_;
  FuzzyEngine engine_;
};

class SvmClassifier final : public Classifier {
 public:
  explicit SvmClassifier(SvmModel model) : model_(std::move(model)) {}

  std::string type() const override { return "svm"; }
  std::vector<double> scores(const ExamplePool& pool, std::span<const std::size_t> ids) const override;
  int decide(double score) const override { return score > 0.0 ? 1 : 0; }
  nlohmann::json to_json() const override;

  const SvmModel& model() const { return model_; }

 private:
  SvmModel model_;
};

/// Inverse of Classifier::to_json, dispatching on the "type" field.
std::shared_ptr<const Classifier> classifier_from_json(const nlohmann::json& j);

/// Catalog a serialized model was built against (shipped catalog for SVMs).
AttributeCatalog catalog_of(const nlohmann::json& model_json);

}  // namespace ntl
