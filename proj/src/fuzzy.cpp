#include "ntl/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ntl/data.hpp"
#include "ntl/error.hpp"
#include "ntl/metrics.hpp"
#include "ntl/random.hpp"

namespace ntl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string_view kind_name(MembershipKind k) { return k == MembershipKind::Trapezoid ? "trapezoid" : "sigmoid"; }

nlohmann::json encode_param(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double decode_param(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    throw ConfigError("membership parameter must be a number, \"inf\" or \"-inf\"");
  }
  return j.get<double>();
}

nlohmann::json encode_mf(const MembershipFunction& mf) {
  nlohmann::json params = nlohmann::json::array();
  for (std::size_t k = 0; k < mf.param_count(); ++k) params.push_back(encode_param(mf.params[k]));
  return {{"kind", kind_name(mf.kind)}, {"params", params}};
}

MembershipFunction decode_mf(const nlohmann::json& j) {
  MembershipFunction mf;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "trapezoid") {
    mf.kind = MembershipKind::Trapezoid;
  } else if (kind == "sigmoid") {
    mf.kind = MembershipKind::Sigmoid;
  } else {
    throw ConfigError("unknown membership function kind '" + kind + "'");
  }
  const auto& params = j.at("params");
  if (!params.is_array() || params.size() != mf.param_count())
    throw ConfigError(kind + " needs " + std::to_string(mf.param_count()) + " parameters");
  for (std::size_t k = 0; k < mf.param_count(); ++k) mf.params[k] = decode_param(params[k]);
  return mf;
}

std::string_view output_name(OutputLabel l) { return l == OutputLabel::Ntl ? "ntl" : "no_ntl"; }

OutputLabel parse_output(const std::string& s) {
  if (s == "ntl") return OutputLabel::Ntl;
  if (s == "no_ntl") return OutputLabel::NoNtl;
  throw ConfigError("rule consequent must be 'ntl' or 'no_ntl', got '" + s + "'");
}

double quantile(const std::vector<double>& sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double grid_x(std::size_t i, std::size_t n) { return static_cast<double>(i) / static_cast<double>(n - 1); }

/// Running area and first moment of the linear interpolant through uniform
/// grid samples; segment integrals are exact.
struct CentroidSum {
  std::size_t n;
  double area = 0.0, moment = 0.0, prev = 0.0;
  std::size_t i = 0;

  void add(double mu) {
    if (i > 0) {
      const double x0 = grid_x(i - 1, n), x1 = grid_x(i, n);
      area += prev + mu;
      moment += x0 * (2.0 * prev + mu) + x1 * (prev + 2.0 * mu);
    }
    prev = mu;
    ++i;
  }
  // Common factors dx/2 (area) and dx/6 (moment) cancel down to 1/3.
  std::optional<double> centroid() const {
    if (area <= 0.0) return std::nullopt;
    return moment / (3.0 * area);
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// Membership functions

bool MembershipFunction::valid() const {
  if (kind == MembershipKind::Sigmoid) {
    return std::isfinite(params[0]) && std::isfinite(params[1]) && params[1] != 0.0;
  }
  const auto [a, b, c, d] = params;
  if (std::isnan(a) || std::isnan(b) || std::isnan(c) || std::isnan(d)) return false;
  if (!(a <= b && b <= c && c <= d)) return false;
  return a < kInf && b < kInf && c > -kInf && d > -kInf;
}

double membership_eval(const MembershipFunction& mf, double x) {
  if (mf.kind == MembershipKind::Sigmoid) return 1.0 / (1.0 + std::exp(-mf.params[1] * (x - mf.params[0])));
  const auto [a, b, c, d] = mf.params;
  if (x >= b && x <= c) return 1.0;
  if (x <= a || x >= d) return 0.0;
  if (x < b) return (x - a) / (b - a);
  return (d - x) / (d - c);
}

void project_trapezoid(MembershipFunction& mf) {
  if (mf.kind != MembershipKind::Trapezoid) return;
  // pool adjacent violators over the finite entries; infinite shoulders stay put
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < 4; ++k)
    if (std::isfinite(mf.params[k])) idx.push_back(k);
  struct Block {
    double sum;
    std::size_t count;
    double mean() const { return sum / static_cast<double>(count); }
  };
  std::vector<Block> blocks;
  for (std::size_t k : idx) {
    blocks.push_back({mf.params[k], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
      blocks[blocks.size() - 2].sum += blocks.back().sum;
      blocks[blocks.size() - 2].count += blocks.back().count;
      blocks.pop_back();
    }
  }
  std::size_t pos = 0;
  for (const auto& blk : blocks)
    for (std::size_t n = 0; n < blk.count; ++n) mf.params[idx[pos++]] = blk.mean();
}

// ---------------------------------------------------------------------------
// System structure

void FuzzySystem::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("fuzzy system: " + m); };
  if (grid_resolution < 2) fail("grid_resolution must be at least 2");
  std::map<std::string, std::set<std::string>> labels;
  for (const auto& v : variables) {
    if (labels.contains(v.attribute)) fail("duplicate variable '" + v.attribute + "'");
    auto& set_labels = labels[v.attribute];
    const auto n = v.sets.size();
    if (n != 1 && n != 2 && n != 4)
      fail("variable '" + v.attribute + "' has " + std::to_string(n) + " membership functions; expected 1, 2 or 4");
    for (const auto& s : v.sets) {
      if (!set_labels.insert(s.label).second) fail("duplicate label '" + s.label + "' on '" + v.attribute + "'");
      if (!s.mf.valid()) fail("invalid membership function '" + s.label + "' on '" + v.attribute + "'");
    }
  }
  if (rules.empty()) fail("no rules");
  for (const auto& r : rules) {
    if (r.otherwise) {
      if (!r.antecedents.empty()) fail("otherwise rule '" + r.name + "' must not have antecedents");
      continue;
    }
    if (r.antecedents.empty()) fail("rule '" + r.name + "' has no antecedents");
    for (const auto& a : r.antecedents) {
      const auto it = labels.find(a.variable);
      if (it == labels.end()) fail("rule '" + r.name + "' references unknown variable '" + a.variable + "'");
      if (!it->second.contains(a.label))
        fail("rule '" + r.name + "' references unknown label '" + a.label + "' of '" + a.variable + "'");
    }
  }
  if (!output.no_ntl.valid() || !output.ntl.valid()) fail("invalid output membership function");
  for (std::size_t i = 0; i < grid_resolution; ++i) {
    const double x = grid_x(i, grid_resolution);
    if (std::max(membership_eval(output.no_ntl, x), membership_eval(output.ntl, x)) <= 0.0)
      fail("output membership functions leave x = " + format_double(x) + " uncovered");
  }
}

void to_json(nlohmann::json& j, const FuzzySystem& s) {
  nlohmann::json vars = nlohmann::json::array();
  for (const auto& v : s.variables) {
    nlohmann::json sets = nlohmann::json::array();
    for (const auto& fs : v.sets) {
      auto e = encode_mf(fs.mf);
      e["label"] = fs.label;
      sets.push_back(std::move(e));
    }
    vars.push_back({{"attribute", v.attribute}, {"sets", std::move(sets)}});
  }
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& r : s.rules) {
    nlohmann::json ants = nlohmann::json::array();
    for (const auto& a : r.antecedents)
      ants.push_back({{"variable", a.variable}, {"label", a.label}, {"negated", a.negated}});
    rules.push_back({{"name", r.name},
                     {"antecedents", std::move(ants)},
                     {"consequent", output_name(r.consequent)},
                     {"otherwise", r.otherwise}});
  }
  j = nlohmann::json{
      {"variables", std::move(vars)},
      {"rules", std::move(rules)},
      {"output", {{"no_ntl", encode_mf(s.output.no_ntl)}, {"ntl", encode_mf(s.output.ntl)}}},
      {"grid_resolution", s.grid_resolution},
      {"operators", {{"and", "min"}, {"implication", "min"}, {"aggregation", "max"}, {"defuzzifier", "centroid"}}}};
}

void from_json(const nlohmann::json& j, FuzzySystem& s) {
  s = FuzzySystem{};
  for (const auto& v : j.at("variables")) {
    FuzzyVariable var;
    var.attribute = v.at("attribute").get<std::string>();
    for (const auto& e : v.at("sets")) var.sets.push_back({e.at("label").get<std::string>(), decode_mf(e)});
    s.variables.push_back(std::move(var));
  }
  for (const auto& r : j.at("rules")) {
    FuzzyRule rule;
    rule.name = r.at("name").get<std::string>();
    for (const auto& a : r.value("antecedents", nlohmann::json::array()))
      rule.antecedents.push_back(
          {a.at("variable").get<std::string>(), a.at("label").get<std::string>(), a.value("negated", false)});
    rule.consequent = parse_output(r.at("consequent").get<std::string>());
    rule.otherwise = r.value("otherwise", false);
    s.rules.push_back(std::move(rule));
  }
  if (j.contains("output")) {
    s.output.no_ntl = decode_mf(j.at("output").at("no_ntl"));
    s.output.ntl = decode_mf(j.at("output").at("ntl"));
  }
  s.grid_resolution = j.value("grid_resolution", std::size_t{1001});
  if (j.contains("operators")) {
    const auto& ops = j.at("operators");
    if (ops.value("and", "min") != "min" || ops.value("implication", "min") != "min" ||
        ops.value("aggregation", "max") != "max" || ops.value("defuzzifier", "centroid") != "centroid")
      throw ConfigError("only min/min/max/centroid Mamdani operators are supported");
  }
  s.validate();
}

std::map<std::size_t, std::size_t> membership_census(const FuzzySystem& system) {
  std::map<std::size_t, std::size_t> census;
  for (const auto& v : system.variables) ++census[v.sets.size()];
  return census;
}

double AttributeStats::scale() const {
  if (iqr() > 0.0) return iqr();
  if (max - min > 0.0) return max - min;
  return 1.0;
}

std::map<std::string, AttributeStats> compute_attribute_stats(std::span<const AttributeVector> samples) {
  std::map<std::string, AttributeStats> out;
  if (samples.empty()) return out;
  for (const auto& name : samples.front().names()) {
    std::vector<double> v;
    v.reserve(samples.size());
    for (const auto& s : samples) v.push_back(s.at(name));
    std::sort(v.begin(), v.end());
    out[name] = {v.front(), quantile(v, 0.25), quantile(v, 0.5), quantile(v, 0.75), v.back()};
  }
  return out;
}

FuzzySystem fuzzify_ruleset(const RuleSet& ruleset, const std::map<std::string, AttributeStats>& stats) {
  struct Cuts {
    std::set<double> thresholds;  // from < <= > >=
    std::set<double> points;      // from = !=
  };
  std::vector<std::string> order;
  std::map<std::string, Cuts> cuts;
  for (const auto& rule : ruleset.rules) {
    for (const auto& t : rule.terms) {
      if (!cuts.contains(t.attribute)) order.push_back(t.attribute);
      auto& c = cuts[t.attribute];
      if (t.op == Comparator::Equal || t.op == Comparator::NotEqual) {
        c.points.insert(t.value);
      } else {
        c.thresholds.insert(t.value);
      }
    }
  }

  auto lt_label = [](double t) { return "lt_" + format_double(t); };
  auto gt_label = [](double t) { return "gt_" + format_double(t); };
  auto eq_label = [](double v) { return "eq_" + format_double(v); };

  FuzzySystem system;
  for (const auto& attr : order) {
    const auto st = stats.find(attr);
    if (st == stats.end()) throw MissingAttributeError(attr);
    const double width = 0.5 * st->second.scale();
    const auto& c = cuts[attr];
    FuzzyVariable var{attr, {}};
    for (double t : c.thresholds) {
      var.sets.push_back({lt_label(t), MembershipFunction::trapezoid(-kInf, -kInf, t - width / 2, t + width / 2)});
      var.sets.push_back({gt_label(t), MembershipFunction::trapezoid(t - width / 2, t + width / 2, kInf, kInf)});
    }
    for (double v : c.points)
      var.sets.push_back({eq_label(v), MembershipFunction::trapezoid(v - width / 2, v, v, v + width / 2)});
    const auto n = var.sets.size();
    if (n != 1 && n != 2 && n != 4)
      throw ConfigError("attribute '" + attr + "' would need " + std::to_string(n) +
                        " membership functions; rules may impose at most two inequality thresholds "
                        "or one equality value per attribute (1, 2 or 4 functions)");
    system.variables.push_back(std::move(var));
  }

  for (const auto& rule : ruleset.rules) {
    FuzzyRule fr{rule.name, {}, OutputLabel::Ntl, false};
    for (const auto& t : rule.terms) {
      switch (t.op) {
        case Comparator::Less:
        case Comparator::LessEqual: fr.antecedents.push_back({t.attribute, lt_label(t.value), false}); break;
        case Comparator::Greater:
        case Comparator::GreaterEqual: fr.antecedents.push_back({t.attribute, gt_label(t.value), false}); break;
        case Comparator::Equal: fr.antecedents.push_back({t.attribute, eq_label(t.value), false}); break;
        case Comparator::NotEqual: fr.antecedents.push_back({t.attribute, eq_label(t.value), true}); break;
      }
    }
    system.rules.push_back(std::move(fr));
  }
  system.rules.push_back({"otherwise", {}, OutputLabel::NoNtl, true});
  system.validate();
  return system;
}

// ---------------------------------------------------------------------------
// Inference

std::optional<double> defuzzify_centroid(std::span<const double> curve) {
  if (curve.size() < 2) throw std::invalid_argument("centroid needs at least two grid samples");
  CentroidSum sum{curve.size()};
  for (double mu : curve) {
    if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("membership samples must lie in [0, 1]");
    sum.add(mu);
  }
  return sum.centroid();
}

FuzzyEngine::FuzzyEngine(const FuzzySystem& system, const std::vector<std::string>& attribute_order) {
  system.validate();
  std::map<std::pair<std::string, std::string>, std::size_t> set_index;
  for (std::size_t v = 0; v < system.variables.size(); ++v) {
    const auto& var = system.variables[v];
    const auto it = std::find(attribute_order.begin(), attribute_order.end(), var.attribute);
    if (it == attribute_order.end()) throw MissingAttributeError(var.attribute);
    input_index_.push_back(static_cast<std::size_t>(it - attribute_order.begin()));
    for (const auto& s : var.sets) {
      set_index[{var.attribute, s.label}] = functions_.size();
      functions_.push_back(s.mf);
      set_var_.push_back(v);
    }
  }
  for (const auto& r : system.rules) {
    CompiledRule cr{{}, r.consequent, r.otherwise};
    for (const auto& a : r.antecedents) cr.literals.push_back({set_index.at({a.variable, a.label}), a.negated});
    rules_.push_back(std::move(cr));
  }
  const std::size_t n = system.grid_resolution;
  grid_no_ntl_.resize(n);
  grid_ntl_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid_no_ntl_[i] = membership_eval(system.output.no_ntl, grid_x(i, n));
    grid_ntl_[i] = membership_eval(system.output.ntl, grid_x(i, n));
  }
}

void FuzzyEngine::memberships(std::span<const double> inputs, std::span<double> out) const {
  for (std::size_t s = 0; s < functions_.size(); ++s)
    out[s] = membership_eval(functions_[s], inputs[input_index_[set_var_[s]]]);
}

FuzzyEngine::Strengths FuzzyEngine::strengths(std::span<const double> mu) const {
  Strengths st;
  double strongest = 0.0;
  bool any_standard = false;
  auto apply = [&](OutputLabel l, double w) {
    double& slot = l == OutputLabel::Ntl ? st.ntl : st.no_ntl;
    slot = std::max(slot, w);
  };
  for (const auto& r : rules_) {
    if (r.otherwise) continue;
    double w = 1.0;
    for (const auto& lit : r.literals) w = std::min(w, lit.negated ? 1.0 - mu[lit.set] : mu[lit.set]);
    strongest = std::max(strongest, w);
    any_standard = true;
    apply(r.consequent, w);
  }
  for (const auto& r : rules_)
    if (r.otherwise) apply(r.consequent, any_standard ? 1.0 - strongest : 1.0);
  return st;
}

std::vector<double> FuzzyEngine::aggregate(Strengths s) const {
  std::vector<double> curve(grid_ntl_.size());
  for (std::size_t i = 0; i < curve.size(); ++i)
    curve[i] = std::max(std::min(grid_no_ntl_[i], s.no_ntl), std::min(grid_ntl_[i], s.ntl));
  return curve;
}

double FuzzyEngine::score_from(Strengths s) const {
  if (s.no_ntl <= 0.0 && s.ntl <= 0.0) return 0.5;
  CentroidSum sum{grid_ntl_.size()};
  for (std::size_t i = 0; i < grid_ntl_.size(); ++i)
    sum.add(std::max(std::min(grid_no_ntl_[i], s.no_ntl), std::min(grid_ntl_[i], s.ntl)));
  return sum.centroid().value_or(0.5);
}

double FuzzyEngine::score(std::span<const double> inputs) const {
  std::vector<double> mu(functions_.size());
  memberships(inputs, mu);
  return score_from(strengths(mu));
}

double mamdani_infer(const FuzzySystem& system, const AttributeVector& attrs) {
  const FuzzyEngine engine(system, attrs.names());
  return engine.score(attrs.values());
}

FuzzyDecision classify_fuzzy(const FuzzySystem& system, const AttributeVector& attrs, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("threshold must lie in (0, 1)");
  const double s = mamdani_infer(system, attrs);
  return {s > threshold ? 1 : 0, s};
}

// ---------------------------------------------------------------------------
// SGD tuning

void SgdConfig::validate() const {
  if (!(learning_rate >= 0.0 && std::isfinite(learning_rate))) throw ConfigError("learning_rate must be >= 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must lie in (0, 1)");
  if (!(fd_step > 0.0)) throw ConfigError("fd_step must be positive");
}

void to_json(nlohmann::json& j, const SgdConfig& c) {
  j = nlohmann::json{{"learning_rate", c.learning_rate}, {"epochs", c.epochs}, {"batch_size", c.batch_size},
                     {"seed", c.seed}, {"threshold", c.threshold}, {"fd_step", c.fd_step}};
}

void from_json(const nlohmann::json& j, SgdConfig& c) {
  const SgdConfig d;
  c.learning_rate = j.value("learning_rate", d.learning_rate);
  c.epochs = j.value("epochs", d.epochs);
  c.batch_size = j.value("batch_size", d.batch_size);
  c.seed = j.value("seed", d.seed);
  c.threshold = j.value("threshold", d.threshold);
  c.fd_step = j.value("fd_step", d.fd_step);
}

namespace {

constexpr double kLossEps = 1e-6;

double example_loss(double score, int label) {
  const double p = std::clamp(score, kLossEps, 1.0 - kLossEps);
  return label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

struct TunableParam {
  std::size_t set;
  std::size_t k;
  double scale;  // parameter units per normalized unit
};

/// Examples resolved to the system's variable order, plus the tunable
/// parameter layout and a mutable engine.
class Tuner {
 public:
  Tuner(const FuzzySystem& system, const LabeledAttributes& scale_source)
      : system_(system), engine_(system, variable_names(system)) {
    std::vector<double> scale(system.variables.size(), 1.0);
    const auto stats = compute_attribute_stats(scale_source.examples);
    for (std::size_t v = 0; v < system.variables.size(); ++v) {
      const auto it = stats.find(system.variables[v].attribute);
      if (it == stats.end()) throw MissingAttributeError(system.variables[v].attribute);
      scale[v] = it->second.scale();
    }
    for (std::size_t s = 0; s < engine_.set_count(); ++s) {
      const auto& mf = engine_.functions()[s];
      const double sc = scale[engine_.set_variable(s)];
      if (mf.kind == MembershipKind::Sigmoid) {
        params_.push_back({s, 0, sc});
        params_.push_back({s, 1, 1.0 / sc});
        continue;
      }
      for (std::size_t k = 0; k < 4; ++k)
        if (std::isfinite(mf.params[k])) params_.push_back({s, k, sc});
    }
  }

  static std::vector<std::string> variable_names(const FuzzySystem& s) {
    std::vector<std::string> out;
    for (const auto& v : s.variables) out.push_back(v.attribute);
    return out;
  }

  /// Inputs row-major, one value per variable.
  std::vector<double> resolve(const LabeledAttributes& data) const {
    std::vector<double> rows;
    rows.reserve(data.examples.size() * system_.variables.size());
    for (const auto& ex : data.examples)
      for (const auto& v : system_.variables) rows.push_back(ex.at(v.attribute));
    return rows;
  }

  std::size_t width() const { return system_.variables.size(); }
  const std::vector<TunableParam>& params() const { return params_; }
  const FuzzyEngine& engine() const { return engine_; }

  std::vector<double> scores(const std::vector<double>& rows) const {
    std::vector<double> out;
    const std::size_t w = width();
    for (std::size_t i = 0; i * w < rows.size(); ++i)
      out.push_back(engine_.score(std::span<const double>(rows.data() + i * w, w)));
    return out;
  }

  double mean_loss(const std::vector<double>& rows, std::span<const int> labels) const {
    const auto s = scores(rows);
    double total = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) total += example_loss(s[i], labels[i]);
    return s.empty() ? 0.0 : total / static_cast<double>(s.size());
  }

  /// Central-difference gradient of the batch mean loss in normalized
  /// coordinates. Only examples whose perturbed membership differs from the
  /// base value contribute, which keeps the cost near O(params * ramp hits).
  std::vector<double> gradient(const std::vector<double>& rows, std::span<const int> labels,
                               std::span<const std::size_t> batch, double fd_step) const {
    const std::size_t w = width();
    const std::size_t nsets = engine_.set_count();
    std::vector<double> mu(batch.size() * nsets);
    std::vector<FuzzyEngine::Strengths> base_st(batch.size());
    std::vector<double> base_score(batch.size());
    for (std::size_t b = 0; b < batch.size(); ++b) {
      std::span<double> m(mu.data() + b * nsets, nsets);
      engine_.memberships(std::span<const double>(rows.data() + batch[b] * w, w), m);
      base_st[b] = engine_.strengths(m);
      base_score[b] = engine_.score_from(base_st[b]);
    }

    auto loss_with = [&](std::size_t b, std::size_t set, double degree) {
      std::span<double> m(mu.data() + b * nsets, nsets);
      const double saved = m[set];
      m[set] = degree;
      const auto st = engine_.strengths(m);
      m[set] = saved;
      const double s = (st.ntl == base_st[b].ntl && st.no_ntl == base_st[b].no_ntl) ? base_score[b]
                                                                                    : engine_.score_from(st);
      return example_loss(s, labels[batch[b]]);
    };

    std::vector<double> grad(params_.size(), 0.0);
    for (std::size_t j = 0; j < params_.size(); ++j) {
      const auto& p = params_[j];
      const double h = fd_step * p.scale;
      MembershipFunction plus = engine_.functions()[p.set];
      MembershipFunction minus = plus;
      plus.params[p.k] += h;
      minus.params[p.k] -= h;
      const std::size_t input = engine_.input_index()[engine_.set_variable(p.set)];
      double diff = 0.0;
      for (std::size_t b = 0; b < batch.size(); ++b) {
        const double x = rows[batch[b] * w + input];
        const double base = mu[b * nsets + p.set];
        const double up = membership_eval(plus, x);
        const double down = membership_eval(minus, x);
        if (up == base && down == base) continue;
        diff += loss_with(b, p.set, up) - loss_with(b, p.set, down);
      }
      const double dtheta = diff / static_cast<double>(batch.size()) / (2.0 * h);
      grad[j] = dtheta * p.scale;
    }
    return grad;
  }

  double batch_loss(const std::vector<double>& rows, std::span<const int> labels,
                    std::span<const std::size_t> batch) const {
    const std::size_t w = width();
    double total = 0.0;
    for (std::size_t b : batch)
      total += example_loss(engine_.score(std::span<const double>(rows.data() + b * w, w)), labels[b]);
    return total / static_cast<double>(batch.size());
  }

  /// Gradient step with backtracking: the step is halved until the batch
  /// loss does not increase, and dropped after kMaxHalvings attempts.
  void descend(const std::vector<double>& grad, double learning_rate, const std::vector<double>& rows,
               std::span<const int> labels, std::span<const std::size_t> batch) {
    constexpr int kMaxHalvings = 10;
    const double before = batch_loss(rows, labels, batch);
    const FuzzySystem saved = system_;
    for (int attempt = 0; attempt <= kMaxHalvings; ++attempt) {
      step(grad, learning_rate);
      if (batch_loss(rows, labels, batch) <= before) return;
      restore(saved);
      learning_rate /= 2.0;
    }
  }

  void restore(const FuzzySystem& saved) {
    system_ = saved;
    engine_ = FuzzyEngine(system_, variable_names(system_));
  }

  void step(const std::vector<double>& grad, double learning_rate) {
    std::set<std::size_t> touched;
    for (std::size_t j = 0; j < params_.size(); ++j) {
      const auto& p = params_[j];
      auto& mf = mutable_function(p.set);
      mf.params[p.k] -= learning_rate * p.scale * grad[j];
      touched.insert(p.set);
    }
    for (std::size_t s : touched) {
      auto& mf = mutable_function(s);
      if (mf.kind == MembershipKind::Trapezoid) {
        project_trapezoid(mf);
      } else if (std::abs(mf.params[1]) < 1e-9) {
        mf.params[1] = std::signbit(mf.params[1]) ? -1e-9 : 1e-9;
      }
    }
    engine_ = FuzzyEngine(system_, variable_names(system_));
  }

  const FuzzySystem& system() const { return system_; }

 private:
  MembershipFunction& mutable_function(std::size_t set) {
    std::size_t s = set;
    for (auto& v : system_.variables) {
      if (s < v.sets.size()) return v.sets[s].mf;
      s -= v.sets.size();
    }
    throw std::out_of_range("fuzzy set index");
  }

  FuzzySystem system_;
  FuzzyEngine engine_;
  std::vector<TunableParam> params_;
};

void check_labeled(const LabeledAttributes& d, const char* what) {
  if (d.examples.size() != d.labels.size())
    throw std::invalid_argument(std::string(what) + ": examples and labels differ in length");
  if (d.examples.empty()) throw ClassStarvedError(std::string(what) + " set is empty");
}

std::optional<double> auc_of(const std::vector<double>& scores, std::span<const int> labels, double threshold) {
  std::vector<int> pred(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) pred[i] = scores[i] > threshold ? 1 : 0;
  return metrics(confusion(pred, labels)).auc;
}

}  // namespace

double log_loss(const FuzzySystem& system, const LabeledAttributes& data) {
  check_labeled(data, "evaluation");
  const Tuner t(system, data);
  return t.mean_loss(t.resolve(data), data.labels);
}

std::vector<double> loss_gradient(const FuzzySystem& system, const LabeledAttributes& data, double fd_step) {
  check_labeled(data, "gradient");
  const Tuner t(system, data);
  const auto rows = t.resolve(data);
  std::vector<std::size_t> all(data.examples.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return t.gradient(rows, data.labels, all, fd_step);
}

SgdResult sgd_optimize(const FuzzySystem& system, const LabeledAttributes& train, const LabeledAttributes& validation,
                       const SgdConfig& config, const SgdObserver& observer) {
  config.validate();
  check_labeled(train, "training");
  check_labeled(validation, "validation");
  const bool has_pos = std::find(validation.labels.begin(), validation.labels.end(), 1) != validation.labels.end();
  const bool has_neg = std::find(validation.labels.begin(), validation.labels.end(), 0) != validation.labels.end();
  if (!has_pos || !has_neg) throw ClassStarvedError("validation set must contain both classes (AUC undefined)");

  Tuner tuner(system, train);
  const auto train_rows = tuner.resolve(train);
  const auto val_rows = tuner.resolve(validation);
  Rng rng(config.seed);

  SgdResult result;
  result.system = system;
  std::size_t updates = 0;
  double best_loss = 0.0;
  std::optional<double> best_auc;

  auto record = [&](std::size_t epoch) {
    EpochTrace t;
    t.epoch = epoch;
    t.train_loss = tuner.mean_loss(train_rows, train.labels);
    const auto vs = tuner.scores(val_rows);
    double vl = 0.0;
    for (std::size_t i = 0; i < vs.size(); ++i) vl += example_loss(vs[i], validation.labels[i]);
    t.validation_loss = vl / static_cast<double>(vs.size());
    t.validation_auc = auc_of(vs, validation.labels, config.threshold);
    t.updates = updates;
    result.trace.push_back(t);
    const bool better = epoch == 0 || *t.validation_auc > *best_auc ||
                        (*t.validation_auc == *best_auc && t.validation_loss < best_loss);
    if (better) {
      best_auc = t.validation_auc;
      best_loss = t.validation_loss;
      result.selected_epoch = epoch;
      result.system = tuner.system();
    }
  };

  record(0);
  std::vector<std::size_t> order(train.examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t len = std::min(config.batch_size, order.size() - start);
      const auto grad = tuner.gradient(train_rows, train.labels, std::span<const std::size_t>(order).subspan(start, len),
                                       config.fd_step);
      tuner.descend(grad, config.learning_rate, train_rows, train.labels,
                    std::span<const std::size_t>(order).subspan(start, len));
      ++updates;
      if (observer) observer(tuner.system(), updates);
    }
    record(epoch);
  }
  result.updates = updates;
  result.final_system = tuner.system();
  return result;
}

}  // namespace ntl
