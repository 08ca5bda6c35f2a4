#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include <nlohmann/json_fwd.hpp>

namespace ntl {

struct NormalizedConfusion {
  // Rows of the normalized matrix; a row is absent when its actual class is empty.
  std::optional<double> tnr, fpr;  // actual negatives
  std::optional<double> fnr, tpr;  // actual positives
};

struct ConfusionMatrix {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;

  std::size_t total() const { return tp + tn + fp + fn; }
  std::size_t actual_positives() const { return tp + fn; }
  std::size_t actual_negatives() const { return tn + fp; }
  NormalizedConfusion normalized() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Accuracy is always defined; the class-conditional rates (and hence the
/// single-point AUC) are empty when the matching actual class is empty.
struct MetricReport {
  double accuracy = 0.0;
  std::optional<double> recall;
  std::optional<double> specificity;
  std::optional<double> fpr;
  std::optional<double> auc;

  bool defined() const { return auc.has_value(); }
};

/// Throws std::invalid_argument on length mismatch or empty input, and on
/// labels outside {0, 1}.
ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels);

MetricReport metrics(const ConfusionMatrix& cm);

/// Area under the ROC polyline (0,0) -> (fpr, tpr) -> (1,1). Equals
/// (recall + specificity) / 2.
double single_point_auc(double recall, double specificity);

void to_json(nlohmann::json& j, const ConfusionMatrix& cm);
void to_json(nlohmann::json& j, const MetricReport& m);

}  // namespace ntl
