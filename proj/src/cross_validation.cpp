#include "ntl/cross_validation.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "ntl/error.hpp"
#include "ntl/random.hpp"

namespace ntl {

void SplitRatios::validate() const {
  if (!(train > 0.0 && validation > 0.0 && test > 0.0))
    throw ConfigError("train/validation/test ratios must all be positive");
  if (std::abs(train + validation + test - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");
}

Split stratified_split(std::span<const int> labels, const SplitRatios& ratios, std::uint64_t seed) {
  ratios.validate();
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(pos));
  rng.shuffle(std::span<std::size_t>(neg));

  const double n = static_cast<double>(labels.size());
  const double frac_pos = labels.empty() ? 0.0 : static_cast<double>(pos.size()) / n;
  const auto n_train = static_cast<std::size_t>(std::llround(n * ratios.train));
  const auto n_val = static_cast<std::size_t>(std::llround(n * ratios.validation));
  const auto p_train = std::min(pos.size(), static_cast<std::size_t>(std::llround(static_cast<double>(n_train) * frac_pos)));
  const auto p_val =
      std::min(pos.size() - p_train, static_cast<std::size_t>(std::llround(static_cast<double>(n_val) * frac_pos)));

  Split s;
  auto take = [](std::vector<std::size_t>& into, const std::vector<std::size_t>& from, std::size_t begin,
                 std::size_t end) { into.insert(into.end(), from.begin() + static_cast<std::ptrdiff_t>(begin),
                                                from.begin() + static_cast<std::ptrdiff_t>(end)); };
  take(s.train, pos, 0, p_train);
  take(s.train, neg, 0, n_train - p_train);
  take(s.validation, pos, p_train, p_train + p_val);
  take(s.validation, neg, n_train - p_train, n_train - p_train + n_val - p_val);
  take(s.test, pos, p_train + p_val, pos.size());
  take(s.test, neg, n_train - p_train + n_val - p_val, neg.size());
  return s;
}

CrossValidationResult cross_validate(const ExamplePool& pool, std::span<const std::size_t> sample,
                                     const Trainer& trainer, const CrossValidationConfig& config) {
  if (config.folds < 1) throw ConfigError("cross-validation needs at least one fold");
  std::vector<int> labels;
  labels.reserve(sample.size());
  for (std::size_t id : sample) labels.push_back(pool.labels.at(id));
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  const std::size_t negatives = labels.size() - positives;
  if (positives < config.folds || negatives < config.folds)
    throw ClassStarvedError("cross-validation needs at least " + std::to_string(config.folds) +
                            " examples of each class (have " + std::to_string(positives) + " positive, " +
                            std::to_string(negatives) + " negative)");

  CrossValidationResult result;
  std::optional<double> best_auc;
  for (std::size_t f = 0; f < config.folds; ++f) {
    const Split local = stratified_split(labels, config.ratios, derive_seed(config.seed, {f}));
    Split ids;
    auto map_ids = [&](const std::vector<std::size_t>& from, std::vector<std::size_t>& to) {
      to.reserve(from.size());
      for (std::size_t p : from) to.push_back(sample[p]);
    };
    map_ids(local.train, ids.train);
    map_ids(local.validation, ids.validation);
    map_ids(local.test, ids.test);

    auto model = trainer(ids.train, ids.validation, derive_seed(config.seed, {f, 1}));

    auto evaluate = [&](const std::vector<std::size_t>& part, ConfusionMatrix* keep) {
      std::vector<int> truth;
      for (std::size_t id : part) truth.push_back(pool.labels[id]);
      const auto cm = confusion(model->predict(pool, part), truth);
      if (keep) *keep = cm;
      return metrics(cm);
    };
    FoldReport rep;
    rep.fold = f;
    rep.train_size = ids.train.size();
    rep.validation_size = ids.validation.size();
    rep.test_size = ids.test.size();
    rep.validation = evaluate(ids.validation, nullptr);
    rep.test = evaluate(ids.test, &rep.test_confusion);
    result.folds.push_back(rep);

    const auto auc = rep.validation.auc;
    if (!result.best || (auc && (!best_auc || *auc > *best_auc))) {
      result.best = std::move(model);
      result.selected_fold = f;
      result.selected_split = std::move(ids);
      best_auc = auc;
    }
  }
  return result;
}

void to_json(nlohmann::json& j, const FoldReport& f) {
  j = nlohmann::json{{"fold", f.fold},
                     {"train_size", f.train_size},
                     {"validation_size", f.validation_size},
                     {"test_size", f.test_size},
                     {"validation", f.validation},
                     {"test", f.test},
                     {"test_confusion", f.test_confusion}};
}

}  // namespace ntl
