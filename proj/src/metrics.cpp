#include "ntl/metrics.hpp"

#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ntl {

NormalizedConfusion ConfusionMatrix::normalized() const {
  NormalizedConfusion n;
  if (const auto neg = actual_negatives(); neg > 0) {
    n.tnr = static_cast<double>(tn) / static_cast<double>(neg);
    n.fpr = static_cast<double>(fp) / static_cast<double>(neg);
  }
  if (const auto pos = actual_positives(); pos > 0) {
    n.fnr = static_cast<double>(fn) / static_cast<double>(pos);
    n.tpr = static_cast<double>(tp) / static_cast<double>(pos);
  }
  return n;
}

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) throw std::invalid_argument("predictions and labels differ in length");
  if (labels.empty()) throw std::invalid_argument("confusion matrix of an empty sample");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int p = predictions[i];
    const int y = labels[i];
    if ((p != 0 && p != 1) || (y != 0 && y != 1)) throw std::invalid_argument("labels must be 0 or 1");
    if (y == 1) {
      ++(p == 1 ? cm.tp : cm.fn);
    } else {
      ++(p == 1 ? cm.fp : cm.tn);
    }
  }
  return cm;
}

MetricReport metrics(const ConfusionMatrix& cm) {
  MetricReport m;
  const auto total = cm.total();
  if (total > 0) m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(total);
  if (cm.actual_positives() > 0)
    m.recall = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
  if (cm.actual_negatives() > 0) {
    m.specificity = static_cast<double>(cm.tn) / static_cast<double>(cm.tn + cm.fp);
    m.fpr = 1.0 - *m.specificity;
  }
  if (m.recall && m.specificity) m.auc = single_point_auc(*m.recall, *m.specificity);
  return m;
}

double single_point_auc(double recall, double specificity) { return (recall + specificity) / 2.0; }

namespace {

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

void to_json(nlohmann::json& j, const ConfusionMatrix& cm) {
  const auto n = cm.normalized();
  j = nlohmann::json{{"tp", cm.tp}, {"tn", cm.tn}, {"fp", cm.fp}, {"fn", cm.fn},
                     {"normalized", {{"tnr", opt(n.tnr)}, {"fpr", opt(n.fpr)}, {"fnr", opt(n.fnr)}, {"tpr", opt(n.tpr)}}}};
}

void to_json(nlohmann::json& j, const MetricReport& m) {
  j = nlohmann::json{{"accuracy", m.accuracy},
                     {"recall", opt(m.recall)},
                     {"specificity", opt(m.specificity)},
                     {"fpr", opt(m.fpr)},
                     {"auc", opt(m.auc)}};
}

}  // namespace ntl
