#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ntl/error.hpp"

namespace ntl {

/// The 17 NTL proportion levels, from 0% to 100%.
const std::vector<double>& default_levels();

/// Fraction of positive labels in an evaluation sample.
class ProportionLevel {
 public:
  explicit ProportionLevel(double fraction);
  double fraction() const { return fraction_; }

 private:
  double fraction_;
};

class InsufficientSupplyError : public Error {
 public:
  InsufficientSupplyError(std::string limiting_class, std::size_t max_feasible)
      : Error("not enough " + limiting_class + " examples; largest feasible sample is " +
              std::to_string(max_feasible)),
        limiting_class_(std::move(limiting_class)),
        max_feasible_(max_feasible) {}

  const std::string& limiting_class() const { return limiting_class_; }
  std::size_t max_feasible() const { return max_feasible_; }

 private:
  std::string limiting_class_;
  std::size_t max_feasible_;
};

/// round(size * fraction); the rest of the sample is negatives.
std::size_t positive_target(std::size_t size, double fraction);

/// Largest sample size whose class demands fit the pool supply, computed as
/// min(positives / fraction, negatives / (1 - fraction)) rounded down.
std::size_t max_feasible_size(std::size_t positives, std::size_t negatives, double fraction);

/// Uniform sampling without replacement within each class. Returns pool
/// indices in a seeded random order. Throws InsufficientSupplyError.
std::vector<std::size_t> subsample(std::span<const int> labels, ProportionLevel level, std::size_t target_size,
                                   std::uint64_t seed);

}  // namespace ntl
