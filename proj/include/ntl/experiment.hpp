#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ntl/cross_validation.hpp"
#include "ntl/data.hpp"
#include "ntl/fuzzy.hpp"
#include "ntl/svm.hpp"

namespace ntl {

enum class ClassifierType { Boolean, Fuzzy, FuzzySgd, Svm };

std::string to_string(ClassifierType t);
ClassifierType classifier_type_from_string(const std::string& s);

/// Trainable classifiers are cross-validated per level; the others are
/// evaluated directly.
inline bool is_trainable(ClassifierType t) { return t == ClassifierType::FuzzySgd || t == ClassifierType::Svm; }

struct ClassifierSpec {
  std::string name;
  ClassifierType type = ClassifierType::Boolean;
  std::optional<std::filesystem::path> rules_path;  // boolean/fuzzy/fuzzy_sgd; shipped rules when empty
  double threshold = 0.5;                           // fuzzy decision threshold
  SgdConfig sgd;
  SvmConfig svm;
};

/// Rule-based classifier for `spec`; nullptr for trainable types.
std::shared_ptr<const Classifier> make_direct_classifier(const ClassifierSpec& spec, const AttributeCatalog& catalog,
                                                         const std::map<std::string, AttributeStats>& stats);

/// Trainer over `pool`, which must outlive it. Fuzzy SGD starts from the
/// rules fuzzified with `stats`.
Trainer make_trainer(const ClassifierSpec& spec, const ExamplePool& pool, const AttributeCatalog& catalog,
                     const std::map<std::string, AttributeStats>& stats);

/// Rules named by the spec, or the shipped rules.
RuleSet load_rules(const ClassifierSpec& spec, const AttributeCatalog& catalog);

/// Catalog from a JSON file, or the shipped catalog.
AttributeCatalog load_catalog(const std::optional<std::filesystem::path>& path);

struct ExperimentConfig {
  std::optional<std::filesystem::path> consumption_path;
  std::optional<std::filesystem::path> inspections_path;
  std::optional<SynthConfig> synthetic;
  std::optional<std::filesystem::path> catalog_path;
  std::vector<ClassifierSpec> classifiers;
  std::vector<double> levels;
  std::size_t target_size = 1000;
  std::size_t window = 12;
  std::size_t folds = 10;
  SplitRatios ratios;
  std::uint64_t master_seed = 0;
  std::filesystem::path output_dir;
  std::size_t jobs = 1;

  void validate() const;

  /// Relative paths in `j` resolve against `base_dir`.
  static ExperimentConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  /// Everything that determines results; output_dir and jobs are left out.
  nlohmann::json to_json() const;
};

struct ExperimentOutputs {
  nlohmann::json report;
  std::string curves_csv;
  std::map<std::string, std::string> confusion_csvs;  // file name -> contents
  std::map<std::string, nlohmann::json> models;        // file name -> model
};

/// Sweeps every classifier over every level. Rule-based classifiers are
/// scored directly on each level's sample; trainable ones are
/// cross-validated on each level strictly between 0 and 1, then the model
/// from the best level is re-tested on all levels, once picked by test AUC
/// and once by validation AUC. Cell failures are recorded, not thrown.
ExperimentOutputs run_experiment(const ExperimentConfig& config);

/// Writes report.json, curves.csv, confusion_*.csv and models/ under `dir`.
void write_outputs(const ExperimentOutputs& outputs, const std::filesystem::path& dir);

/// Copy of a report with every "runtime_seconds" key removed.
nlohmann::json strip_runtime(const nlohmann::json& report);

}  // namespace ntl
