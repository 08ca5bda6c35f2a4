#include "ntl/resample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ntl/random.hpp"

namespace ntl {

const std::vector<double>& default_levels() {
  static const std::vector<double> levels{0.0,  0.001, 0.01, 0.02, 0.03, 0.04, 0.05, 0.10, 0.20,
                                          0.30, 0.40,  0.50, 0.60, 0.70, 0.80, 0.90, 1.0};
  return levels;
}

ProportionLevel::ProportionLevel(double fraction) : fraction_(fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("NTL proportion must lie in [0, 1]");
}

std::size_t positive_target(std::size_t size, double fraction) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(size) * fraction));
}

std::size_t max_feasible_size(std::size_t positives, std::size_t negatives, double fraction) {
  constexpr double kSlack = 1e-9;
  double limit = std::numeric_limits<double>::infinity();
  if (fraction > 0.0) limit = std::min(limit, std::floor(static_cast<double>(positives) / fraction + kSlack));
  if (fraction < 1.0) limit = std::min(limit, std::floor(static_cast<double>(negatives) / (1.0 - fraction) + kSlack));
  return static_cast<std::size_t>(limit);
}

std::vector<std::size_t> subsample(std::span<const int> labels, ProportionLevel level, std::size_t target_size,
                                   std::uint64_t seed) {
  if (target_size == 0) throw ConfigError("target sample size must be positive");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
  const std::size_t want_pos = positive_target(target_size, level.fraction());
  const std::size_t want_neg = target_size - want_pos;
  if (want_pos > pos.size() || want_neg > neg.size()) {
    const bool pos_short = want_pos > pos.size();
    throw InsufficientSupplyError(pos_short ? "positive" : "negative",
                                  max_feasible_size(pos.size(), neg.size(), level.fraction()));
  }

  Rng rng(seed);
  auto draw = [&](std::vector<std::size_t>& from, std::size_t k, std::vector<std::size_t>& into) {
    // partial Fisher-Yates
    for (std::size_t i = 0; i < k; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(from.size() - i));
      std::swap(from[i], from[j]);
      into.push_back(from[i]);
    }
  };
  std::vector<std::size_t> out;
  out.reserve(target_size);
  draw(pos, want_pos, out);
  draw(neg, want_neg, out);
  rng.shuffle(std::span<std::size_t>(out));
  return out;
}

}  // namespace ntl
