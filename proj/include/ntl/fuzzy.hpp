#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ntl/features.hpp"
#include "ntl/rules.hpp"

namespace ntl {

enum class MembershipKind { Trapezoid, Sigmoid };

/// Trapezoid(a, b, c, d): 0 outside [a, d], 1 on [b, c], linear ramps between.
/// Infinite a = b (or c = d) gives an open shoulder.
/// Sigmoid(center, steepness): 1 / (1 + exp(-steepness * (x - center))).
struct MembershipFunction {
  MembershipKind kind = MembershipKind::Trapezoid;
  std::array<double, 4> params{};

  static MembershipFunction trapezoid(double a, double b, double c, double d) {
    return {MembershipKind::Trapezoid, {a, b, c, d}};
  }
  static MembershipFunction sigmoid(double center, double steepness) {
    return {MembershipKind::Sigmoid, {center, steepness, 0.0, 0.0}};
  }

  std::size_t param_count() const { return kind == MembershipKind::Trapezoid ? 4 : 2; }
  bool valid() const;

  friend bool operator==(const MembershipFunction&, const MembershipFunction&) = default;
};

double membership_eval(const MembershipFunction& mf, double x);

struct FuzzySet {
  std::string label;
  MembershipFunction mf;

  friend bool operator==(const FuzzySet&, const FuzzySet&) = default;
};

struct FuzzyVariable {
  std::string attribute;
  std::vector<FuzzySet> sets;  // 1, 2 or 4 functions

  friend bool operator==(const FuzzyVariable&, const FuzzyVariable&) = default;
};

enum class OutputLabel { NoNtl, Ntl };

struct Antecedent {
  std::string variable;
  std::string label;
  bool negated = false;  // degree is 1 - membership

  friend bool operator==(const Antecedent&, const Antecedent&) = default;
};

/// Conjunction of antecedents implying one output label. An `otherwise` rule
/// has no antecedents and fires with strength 1 - max(strength of the other
/// rules).
struct FuzzyRule {
  std::string name;
  std::vector<Antecedent> antecedents;
  OutputLabel consequent = OutputLabel::Ntl;
  bool otherwise = false;

  friend bool operator==(const FuzzyRule&, const FuzzyRule&) = default;
};

/// Score variable on [0, 1].
struct OutputVariable {
  MembershipFunction no_ntl = MembershipFunction::trapezoid(0.0, 0.0, 0.25, 0.75);
  MembershipFunction ntl = MembershipFunction::trapezoid(0.25, 0.75, 1.0, 1.0);

  friend bool operator==(const OutputVariable&, const OutputVariable&) = default;
};

/// Mamdani system: min for AND, min (clipping) for implication, max for
/// aggregation, centroid defuzzification on a uniform grid over [0, 1].
struct FuzzySystem {
  std::vector<FuzzyVariable> variables;
  std::vector<FuzzyRule> rules;
  OutputVariable output;
  std::size_t grid_resolution = 1001;

  /// Throws ConfigError naming the broken invariant.
  void validate() const;

  friend bool operator==(const FuzzySystem&, const FuzzySystem&) = default;
};

void to_json(nlohmann::json& j, const FuzzySystem& s);
void from_json(const nlohmann::json& j, FuzzySystem& s);

/// Number of variables per membership-function count.
std::map<std::size_t, std::size_t> membership_census(const FuzzySystem& system);

struct AttributeStats {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;

  double iqr() const { return q3 - q1; }
  /// IQR, falling back to the range and then to 1 for degenerate samples.
  double scale() const;
};

/// Quartiles by linear interpolation between order statistics.
std::map<std::string, AttributeStats> compute_attribute_stats(std::span<const AttributeVector> samples);

/// Turns each crisp rule into a fuzzy rule with an NTL consequent and adds an
/// otherwise rule for the no-NTL side. Every inequality threshold t on an
/// attribute yields a complementary pair lt_t / gt_t crossing 0.5 at t, with a
/// ramp of width 0.5 * IQR; equality values yield a single eq_v function.
FuzzySystem fuzzify_ruleset(const RuleSet& ruleset, const std::map<std::string, AttributeStats>& stats);

/// Centroid of the piecewise-linear curve through samples on a uniform grid
/// over [0, 1] (exact for curves whose breakpoints lie on the grid).
/// Empty optional for an all-zero curve. Throws std::invalid_argument for
/// fewer than two samples or samples outside [0, 1].
std::optional<double> defuzzify_centroid(std::span<const double> curve);

/// Precompiled view of a FuzzySystem bound to an attribute order, used on hot
/// paths (batch scoring, SGD).
class FuzzyEngine {
 public:
  FuzzyEngine(const FuzzySystem& system, const std::vector<std::string>& attribute_order);

  struct Strengths {
    double no_ntl = 0.0;
    double ntl = 0.0;
  };

  std::size_t set_count() const { return set_var_.size(); }
  std::size_t set_variable(std::size_t set) const { return set_var_[set]; }

  /// Membership degree of every fuzzy set, flattened in variable order.
  void memberships(std::span<const double> inputs, std::span<double> out) const;
  Strengths strengths(std::span<const double> memberships) const;
  double score_from(Strengths s) const;
  double score(std::span<const double> inputs) const;

  /// Aggregated output curve on the grid.
  std::vector<double> aggregate(Strengths s) const;

  /// Input index (into attribute_order) for each variable.
  const std::vector<std::size_t>& input_index() const { return input_index_; }
  const std::vector<MembershipFunction>& functions() const { return functions_; }

 private:
  struct Literal {
    std::size_t set;
    bool negated;
  };
  struct CompiledRule {
    std::vector<Literal> literals;
    OutputLabel consequent;
    bool otherwise;
  };

  std::vector<std::size_t> input_index_;
  std::vector<std::size_t> set_var_;
  std::vector<MembershipFunction> functions_;
  std::vector<CompiledRule> rules_;
  std::vector<double> grid_no_ntl_, grid_ntl_;
};

/// Score in [0, 1]; 0.5 when no rule fires. Throws MissingAttributeError.
double mamdani_infer(const FuzzySystem& system, const AttributeVector& attrs);

struct FuzzyDecision {
  int label = 0;
  double score = 0.5;
};

/// Label 1 iff score > threshold; threshold must lie in (0, 1).
FuzzyDecision classify_fuzzy(const FuzzySystem& system, const AttributeVector& attrs, double threshold = 0.5);

struct SgdConfig {
  double learning_rate = 0.05;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  double threshold = 0.5;  // decision threshold for validation AUC
  double fd_step = 1e-4;   // finite-difference step as a fraction of attribute IQR

  void validate() const;
};

void to_json(nlohmann::json& j, const SgdConfig& c);
void from_json(const nlohmann::json& j, SgdConfig& c);

struct LabeledAttributes {
  std::span<const AttributeVector> examples;
  std::span<const int> labels;
};

struct EpochTrace {
  std::size_t epoch = 0;  // 0 is the initial system
  double train_loss = 0.0;
  double validation_loss = 0.0;
  std::optional<double> validation_auc;
  std::size_t updates = 0;  // cumulative parameter updates
};

struct SgdResult {
  FuzzySystem system;        // selected snapshot
  FuzzySystem final_system;  // state after the last epoch
  std::vector<EpochTrace> trace;
  std::size_t selected_epoch = 0;
  std::size_t updates = 0;  // updates applied to each tunable parameter in total
};

/// Called after every parameter update with the current system and the
/// running update count.
using SgdObserver = std::function<void(const FuzzySystem&, std::size_t)>;

/// Tunes the finite input membership parameters by minibatch SGD on the
/// log-loss of the defuzzified score, with central finite-difference
/// gradients taken in IQR-normalized coordinates. A step that raises the
/// batch loss is halved until it does not. Trapezoids are projected back to
/// a <= b <= c <= d after every step. Returns the epoch snapshot with the
/// best validation AUC (ties: lower validation loss, then earlier epoch).
SgdResult sgd_optimize(const FuzzySystem& system, const LabeledAttributes& train,
                       const LabeledAttributes& validation, const SgdConfig& config,
                       const SgdObserver& observer = {});

/// Finite-difference gradient of the mean training log-loss with respect to
/// the tunable parameters, in the same normalized coordinates sgd_optimize
/// steps in.
std::vector<double> loss_gradient(const FuzzySystem& system, const LabeledAttributes& data, double fd_step = 1e-4);

/// Mean log-loss of the system's scores against labels.
double log_loss(const FuzzySystem& system, const LabeledAttributes& data);

/// Euclidean projection of (a, b, c, d) onto a <= b <= c <= d (pool adjacent
/// violators over the finite entries).
void project_trapezoid(MembershipFunction& mf);

}  // namespace ntl
