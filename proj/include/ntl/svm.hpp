#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ntl/features.hpp"

namespace ntl {

enum class KernelKind { Linear, Rbf };

struct SvmConfig {
  double c = 1.0;
  KernelKind kernel = KernelKind::Linear;
  double gamma = 0.0;  // rbf only; <= 0 selects 1 / (N * variance of standardized features)
  std::size_t epochs = 50;
  std::uint64_t seed = 0;
  std::vector<double> c_grid{0.01, 0.1, 1.0, 10.0, 100.0};
  double tolerance = 1e-3;  // KKT violation tolerance of the dual solver

  void validate() const;
};

void to_json(nlohmann::json& j, const SvmConfig& c);
void from_json(const nlohmann::json& j, SvmConfig& c);

/// Per-column z-score parameters; zero-variance columns keep unit scale.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;

  static Standardizer fit(const FeatureMatrix& features);
  void apply(std::span<const double> row, std::span<double> out) const;
};

struct SvmModel {
  KernelKind kernel = KernelKind::Linear;
  std::size_t dim = 0;
  double gamma = 0.0;
  std::vector<double> weights;          // linear
  std::vector<double> support_vectors;  // rbf, standardized, row-major
  std::vector<double> coefficients;     // rbf, alpha_i * y_i per support vector
  double bias = 0.0;
  Standardizer standardization;
  SvmConfig config;
  std::vector<double> objective_trace;  // linear: primal objective after each epoch

  std::size_t support_vector_count() const { return coefficients.size(); }
  /// Signed margin of one raw (unstandardized) feature row.
  double decision(std::span<const double> row) const;
};

void to_json(nlohmann::json& j, const SvmModel& m);
void from_json(const nlohmann::json& j, SvmModel& m);

/// exp(-gamma * |u - v|^2). Throws std::invalid_argument on length mismatch
/// or non-positive gamma.
double kernel_rbf(std::span<const double> u, std::span<const double> v, double gamma);

/// Trains with config.c. Linear: stochastic subgradient descent on
/// (1/2)|w|^2 + C * sum(hinge) with step 1/(lambda t), lambda = 1/(C n); the
/// returned weights are the epoch-average iterate with the lowest primal
/// objective (each epoch average gets its exact optimal bias). Rbf: dual
/// coordinate ascent over violating pairs (SMO) to config.tolerance.
/// Throws ClassStarvedError on single-class input, std::invalid_argument on
/// non-finite features.
SvmModel train_svm(const FeatureMatrix& features, const TargetVector& targets, const SvmConfig& config);

/// Trains one model per value of config.c_grid and keeps the one with the
/// best validation AUC (ties: earliest grid entry).
SvmModel train_svm(const FeatureMatrix& features, const TargetVector& targets, const SvmConfig& config,
                   const FeatureMatrix& validation_features, const TargetVector& validation_targets);

struct SvmPrediction {
  std::vector<double> scores;
  std::vector<int> labels;  // 1 iff score > 0
};

SvmPrediction predict_svm(const SvmModel& model, const FeatureMatrix& features);
SvmPrediction predict_svm(const SvmModel& model, std::span<const double> row);

/// (1/2)|w|^2 + C * sum(hinge) of a linear model on the given data.
double primal_objective(const SvmModel& model, const FeatureMatrix& features, const TargetVector& targets);
double mean_hinge_loss(const SvmModel& model, const FeatureMatrix& features, const TargetVector& targets);

struct DualSolution {
  std::vector<double> alpha;
  double bias = 0.0;
  double objective = 0.0;  // sum(alpha) - (1/2) sum_ij alpha_i alpha_j y_i y_j K_ij
  std::size_t iterations = 0;
};

/// Solves max sum(alpha) - (1/2) alpha' Q alpha s.t. 0 <= alpha <= C,
/// y' alpha = 0, with Q_ij = y_i y_j K_ij. `kernel` is n x n row-major, y in
/// {-1, +1}.
DualSolution solve_dual(std::span<const double> kernel, std::span<const int> y, double c, double tolerance,
                        std::size_t max_iterations = 10'000'000);

double dual_objective(std::span<const double> kernel, std::span<const int> y, std::span<const double> alpha);

}  // namespace ntl
