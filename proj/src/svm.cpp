#include "ntl/svm.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ntl/error.hpp"
#include "ntl/metrics.hpp"
#include "ntl/random.hpp"

namespace ntl {

namespace {

constexpr double kBiasRate = 0.01;
constexpr std::size_t kFullKernelLimit = 4000;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::vector<int> signed_labels(const TargetVector& t) {
  std::vector<int> y(t.labels.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = t.labels[i] == 1 ? 1 : -1;
  return y;
}

void check_training_input(const FeatureMatrix& f, const TargetVector& t) {
  if (f.rows() != t.labels.size()) throw std::invalid_argument("feature rows and targets differ in length");
  if (f.values.size() != f.rows() * f.window) throw std::invalid_argument("feature matrix shape mismatch");
  for (double v : f.values)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");
  const bool pos = std::find(t.labels.begin(), t.labels.end(), 1) != t.labels.end();
  const bool neg = std::find(t.labels.begin(), t.labels.end(), 0) != t.labels.end();
  if (!pos || !neg) throw ClassStarvedError("SVM training needs both classes");
}

std::vector<double> standardized_rows(const FeatureMatrix& f, const Standardizer& s) {
  std::vector<double> z(f.values.size());
  for (std::size_t i = 0; i < f.rows(); ++i)
    s.apply(f.row(i), std::span<double>(z.data() + i * f.window, f.window));
  return z;
}

/// Bias minimizing sum(hinge(y_i (s_i + b))) for fixed margins s_i.
double optimal_bias(const std::vector<double>& s, const std::vector<int>& y) {
  // Positive i is active for b < 1 - s_i (slope -1), negative i for b > -1 - s_i (slope +1).
  struct Knot {
    double at;
    int delta;  // change in slope when b crosses `at` upward
  };
  std::vector<Knot> knots;
  knots.reserve(s.size());
  long slope = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] == 1) {
      knots.push_back({1.0 - s[i], +1});
      --slope;  // active at b -> -inf
    } else {
      knots.push_back({-1.0 - s[i], +1});
    }
  }
  std::sort(knots.begin(), knots.end(), [](const Knot& a, const Knot& b) { return a.at < b.at; });
  for (std::size_t k = 0; k < knots.size(); ++k) {
    slope += knots[k].delta;
    if (slope > 0) return knots[k].at;
    // flat minimum between two knots: take its midpoint
    if (slope == 0) return k + 1 < knots.size() ? (knots[k].at + knots[k + 1].at) / 2.0 : knots[k].at;
  }
  return knots.empty() ? 0.0 : knots.back().at;
}

/// LIBSVM-style solver (maximal-violating pair with second-order working set
/// selection) on f(a) = 1/2 a'Qa - e'a, the negated dual.
class DualSolver {
 public:
  using RowFn = std::function<void(std::size_t, std::vector<double>&)>;

  DualSolver(std::size_t n, RowFn kernel_row, std::vector<double> diag, std::span<const int> y, double c)
      : n_(n), kernel_row_(std::move(kernel_row)), diag_(std::move(diag)), y_(y.begin(), y.end()), c_(c) {}

  DualSolution solve(double tol, std::size_t max_iter) {
    std::vector<double> alpha(n_, 0.0);
    std::vector<double> grad(n_, -1.0);
    std::vector<double> ki, kj;
    DualSolution out;
    for (; out.iterations < max_iter; ++out.iterations) {
      // i: argmax over I_up of -y G
      double gmax = -std::numeric_limits<double>::infinity();
      std::size_t i = n_;
      for (std::size_t t = 0; t < n_; ++t) {
        if (in_up(alpha, t) && -y_[t] * grad[t] >= gmax) {
          gmax = -y_[t] * grad[t];
          i = t;
        }
      }
      if (i == n_) break;
      kernel_row_(i, ki);
      double gmin = std::numeric_limits<double>::infinity();
      double best = std::numeric_limits<double>::infinity();
      std::size_t j = n_;
      for (std::size_t t = 0; t < n_; ++t) {
        if (!in_low(alpha, t)) continue;
        const double v = -y_[t] * grad[t];
        gmin = std::min(gmin, v);
        const double b = gmax - v;
        if (b > 0.0) {
          double a = diag_[i] + diag_[t] - 2.0 * ki[t];
          if (a <= 0.0) a = 1e-12;
          const double score = -(b * b) / a;
          if (score <= best) {
            best = score;
            j = t;
          }
        }
      }
      if (gmax - gmin < tol || j == n_) break;
      kernel_row_(j, kj);
      update_pair(i, j, ki, kj, alpha, grad);
    }

    out.alpha = alpha;
    out.bias = -rho(alpha, grad);
    double obj = 0.0;
    for (std::size_t t = 0; t < n_; ++t) obj += alpha[t] * (grad[t] - 1.0);
    out.objective = -0.5 * obj;  // f = 1/2 a'(G - e) with G = Qa - e
    return out;
  }

 private:
  bool in_up(const std::vector<double>& a, std::size_t t) const {
    return (y_[t] == 1 && a[t] < c_) || (y_[t] == -1 && a[t] > 0.0);
  }
  bool in_low(const std::vector<double>& a, std::size_t t) const {
    return (y_[t] == -1 && a[t] < c_) || (y_[t] == 1 && a[t] > 0.0);
  }

  void update_pair(std::size_t i, std::size_t j, const std::vector<double>& ki, const std::vector<double>& kj,
                   std::vector<double>& alpha, std::vector<double>& grad) {
    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    double quad = diag_[i] + diag_[j] - 2.0 * ki[j];
    if (quad <= 0.0) quad = 1e-12;
    if (y_[i] != y_[j]) {
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c_) {
          alpha[i] = c_;
          alpha[j] = c_ - diff;
        }
      } else if (alpha[j] > c_) {
        alpha[j] = c_;
        alpha[i] = c_ + diff;
      }
    } else {
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c_) {
        if (alpha[i] > c_) {
          alpha[i] = c_;
          alpha[j] = sum - c_;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c_) {
        if (alpha[j] > c_) {
          alpha[j] = c_;
          alpha[i] = sum - c_;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double dai = alpha[i] - old_ai;
    const double daj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < n_; ++t)
      grad[t] += y_[t] * (y_[i] * ki[t] * dai + y_[j] * kj[t] * daj);
  }

  double rho(const std::vector<double>& alpha, const std::vector<double>& grad) const {
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n_; ++t) {
      const double yg = y_[t] * grad[t];
      const bool at_upper = alpha[t] >= c_;
      const bool at_lower = alpha[t] <= 0.0;
      if (at_upper) {
        if (y_[t] == -1) ub = std::min(ub, yg);
        else lb = std::max(lb, yg);
      } else if (at_lower) {
        if (y_[t] == 1) ub = std::min(ub, yg);
        else lb = std::max(lb, yg);
      } else {
        ++n_free;
        sum_free += yg;
      }
    }
    if (n_free > 0) return sum_free / static_cast<double>(n_free);
    return (ub + lb) / 2.0;
  }

  std::size_t n_;
  RowFn kernel_row_;
  std::vector<double> diag_;
  std::vector<int> y_;
  double c_;
};

double resolved_gamma(const SvmConfig& config, const std::vector<double>& z, std::size_t dim) {
  if (config.gamma > 0.0) return config.gamma;
  double mean = 0.0;
  for (double v : z) mean += v;
  mean /= static_cast<double>(z.size());
  double var = 0.0;
  for (double v : z) var += (v - mean) * (v - mean);
  var /= static_cast<double>(z.size());
  if (!(var > 0.0)) var = 1.0;
  return 1.0 / (static_cast<double>(dim) * var);
}

SvmModel train_linear(const FeatureMatrix& f, const TargetVector& t, const SvmConfig& config) {
  SvmModel m;
  m.kernel = KernelKind::Linear;
  m.dim = f.window;
  m.config = config;
  m.standardization = Standardizer::fit(f);
  const auto z = standardized_rows(f, m.standardization);
  const auto y = signed_labels(t);
  const std::size_t n = f.rows();
  const std::size_t d = f.window;
  const double lambda = 1.0 / (config.c * static_cast<double>(n));
  const double radius = 1.0 / std::sqrt(lambda);

  std::vector<double> w(d, 0.0), avg(d);
  double b = 0.0;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(config.seed);
  double step = 1.0;  // t

  std::vector<double> margins(n);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    std::fill(avg.begin(), avg.end(), 0.0);
    for (std::size_t i : order) {
      const std::span<const double> x(z.data() + i * d, d);
      const double eta = 1.0 / (lambda * step);
      const double margin = y[i] * (dot(w, x) + b);
      const double shrink = 1.0 - 1.0 / step;
      for (double& wk : w) wk *= shrink;
      if (margin < 1.0) {
        for (std::size_t k = 0; k < d; ++k) w[k] += eta * y[i] * x[k];
        b += kBiasRate * eta * y[i];
      }
      const double norm = std::sqrt(dot(w, w));
      if (norm > radius)
        for (double& wk : w) wk *= radius / norm;
      for (std::size_t k = 0; k < d; ++k) avg[k] += w[k];
      step += 1.0;
    }
    for (double& a : avg) a /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) margins[i] = dot(avg, std::span<const double>(z.data() + i * d, d));
    SvmModel candidate = m;
    candidate.weights = avg;
    candidate.bias = optimal_bias(margins, y);
    const double objective = primal_objective(candidate, f, t);
    // keep the best epoch average so far; the trace is non-increasing
    if (m.objective_trace.empty() || objective < m.objective_trace.back()) {
      m.weights = std::move(candidate.weights);
      m.bias = candidate.bias;
      m.objective_trace.push_back(objective);
    } else {
      m.objective_trace.push_back(m.objective_trace.back());
    }
  }
  return m;
}

SvmModel train_rbf(const FeatureMatrix& f, const TargetVector& t, const SvmConfig& config) {
  SvmModel m;
  m.kernel = KernelKind::Rbf;
  m.dim = f.window;
  m.config = config;
  m.standardization = Standardizer::fit(f);
  const auto z = standardized_rows(f, m.standardization);
  const auto y = signed_labels(t);
  const std::size_t n = f.rows();
  const std::size_t d = f.window;
  m.gamma = resolved_gamma(config, z, d);
  const double gamma = m.gamma;
  auto row_of = [&](std::size_t i) { return std::span<const double>(z.data() + i * d, d); };

  DualSolver::RowFn rows;
  std::vector<double> full;
  if (n <= kFullKernelLimit) {
    full.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j)
        full[i * n + j] = full[j * n + i] = std::exp(-gamma * squared_distance(row_of(i), row_of(j)));
    rows = [&](std::size_t i, std::vector<double>& out) { out.assign(full.begin() + i * n, full.begin() + (i + 1) * n); };
  } else {
    rows = [&](std::size_t i, std::vector<double>& out) {
      out.resize(n);
      for (std::size_t j = 0; j < n; ++j) out[j] = std::exp(-gamma * squared_distance(row_of(i), row_of(j)));
    };
  }
  DualSolver solver(n, rows, std::vector<double>(n, 1.0), y, config.c);
  const auto sol = solver.solve(config.tolerance, 10'000'000);
  m.bias = sol.bias;
  for (std::size_t i = 0; i < n; ++i) {
    if (sol.alpha[i] <= 0.0) continue;
    m.coefficients.push_back(sol.alpha[i] * y[i]);
    const auto r = row_of(i);
    m.support_vectors.insert(m.support_vectors.end(), r.begin(), r.end());
  }
  return m;
}

std::string_view kernel_name(KernelKind k) { return k == KernelKind::Linear ? "linear" : "rbf"; }

KernelKind parse_kernel(const std::string& s) {
  if (s == "linear") return KernelKind::Linear;
  if (s == "rbf") return KernelKind::Rbf;
  throw ConfigError("kernel must be 'linear' or 'rbf', got '" + s + "'");
}

}  // namespace

void SvmConfig::validate() const {
  if (!(c > 0.0 && std::isfinite(c))) throw ConfigError("SVM regularization C must be positive");
  if (kernel == KernelKind::Rbf && !(gamma >= 0.0 && std::isfinite(gamma)))
    throw ConfigError("rbf gamma must be positive (or 0 for the automatic default)");
  if (epochs < 1) throw ConfigError("SVM epochs must be >= 1");
  for (double v : c_grid)
    if (!(v > 0.0 && std::isfinite(v))) throw ConfigError("c_grid entries must be positive");
  if (!(tolerance > 0.0)) throw ConfigError("SVM tolerance must be positive");
}

void to_json(nlohmann::json& j, const SvmConfig& c) {
  j = nlohmann::json{{"c", c.c},          {"kernel", kernel_name(c.kernel)}, {"gamma", c.gamma},
                     {"epochs", c.epochs}, {"seed", c.seed},                {"c_grid", c.c_grid},
                     {"tolerance", c.tolerance}};
}

void from_json(const nlohmann::json& j, SvmConfig& c) {
  const SvmConfig d;
  c.c = j.value("c", d.c);
  c.kernel = parse_kernel(j.value("kernel", std::string("linear")));
  c.gamma = j.value("gamma", d.gamma);
  c.epochs = j.value("epochs", d.epochs);
  c.seed = j.value("seed", d.seed);
  c.c_grid = j.value("c_grid", d.c_grid);
  c.tolerance = j.value("tolerance", d.tolerance);
}

Standardizer Standardizer::fit(const FeatureMatrix& f) {
  Standardizer s;
  s.mean.assign(f.window, 0.0);
  s.stddev.assign(f.window, 1.0);
  const double n = static_cast<double>(f.rows());
  if (f.rows() == 0) return s;
  for (std::size_t i = 0; i < f.rows(); ++i)
    for (std::size_t k = 0; k < f.window; ++k) s.mean[k] += f.row(i)[k];
  for (double& m : s.mean) m /= n;
  std::vector<double> var(f.window, 0.0);
  for (std::size_t i = 0; i < f.rows(); ++i)
    for (std::size_t k = 0; k < f.window; ++k) {
      const double dv = f.row(i)[k] - s.mean[k];
      var[k] += dv * dv;
    }
  for (std::size_t k = 0; k < f.window; ++k) {
    const double sd = std::sqrt(var[k] / n);
    s.stddev[k] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

void Standardizer::apply(std::span<const double> row, std::span<double> out) const {
  for (std::size_t k = 0; k < row.size(); ++k) out[k] = (row[k] - mean[k]) / stddev[k];
}

double SvmModel::decision(std::span<const double> row) const {
  if (row.size() != dim)
    throw std::invalid_argument("feature length " + std::to_string(row.size()) + " does not match model dimension " +
                                std::to_string(dim));
  std::vector<double> z(dim);
  standardization.apply(row, z);
  if (kernel == KernelKind::Linear) return dot(weights, z) + bias;
  double s = bias;
  for (std::size_t i = 0; i < coefficients.size(); ++i)
    s += coefficients[i] * std::exp(-gamma * squared_distance(std::span<const double>(support_vectors.data() + i * dim, dim), z));
  return s;
}

double kernel_rbf(std::span<const double> u, std::span<const double> v, double gamma) {
  if (u.size() != v.size()) throw std::invalid_argument("kernel arguments differ in length");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  return std::exp(-gamma * squared_distance(u, v));
}

SvmModel train_svm(const FeatureMatrix& features, const TargetVector& targets, const SvmConfig& config) {
  config.validate();
  check_training_input(features, targets);
  return config.kernel == KernelKind::Linear ? train_linear(features, targets, config)
                                             : train_rbf(features, targets, config);
}

SvmModel train_svm(const FeatureMatrix& features, const TargetVector& targets, const SvmConfig& config,
                   const FeatureMatrix& validation_features, const TargetVector& validation_targets) {
  config.validate();
  if (config.c_grid.empty()) return train_svm(features, targets, config);
  std::optional<SvmModel> best;
  double best_auc = -1.0;
  for (double c : config.c_grid) {
    SvmConfig cfg = config;
    cfg.c = c;
    SvmModel m = train_svm(features, targets, cfg);
    const auto pred = predict_svm(m, validation_features);
    const auto auc = metrics(confusion(pred.labels, validation_targets.labels)).auc.value_or(-1.0);
    if (!best || auc > best_auc) {
      best = std::move(m);
      best_auc = auc;
    }
  }
  return *best;
}

SvmPrediction predict_svm(const SvmModel& model, const FeatureMatrix& features) {
  if (features.window != model.dim)
    throw std::invalid_argument("feature window " + std::to_string(features.window) +
                                " does not match model dimension " + std::to_string(model.dim));
  SvmPrediction p;
  p.scores.reserve(features.rows());
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const double s = model.decision(features.row(i));
    p.scores.push_back(s);
    p.labels.push_back(s > 0.0 ? 1 : 0);
  }
  return p;
}

SvmPrediction predict_svm(const SvmModel& model, std::span<const double> row) {
  const double s = model.decision(row);
  return {{s}, {s > 0.0 ? 1 : 0}};
}

double mean_hinge_loss(const SvmModel& model, const FeatureMatrix& features, const TargetVector& targets) {
  const auto p = predict_svm(model, features);
  double h = 0.0;
  for (std::size_t i = 0; i < p.scores.size(); ++i) {
    const double y = targets.labels[i] == 1 ? 1.0 : -1.0;
    h += std::max(0.0, 1.0 - y * p.scores[i]);
  }
  return p.scores.empty() ? 0.0 : h / static_cast<double>(p.scores.size());
}

double primal_objective(const SvmModel& model, const FeatureMatrix& features, const TargetVector& targets) {
  if (model.kernel != KernelKind::Linear) throw std::invalid_argument("primal objective is defined for linear models");
  return 0.5 * dot(model.weights, model.weights) +
         model.config.c * mean_hinge_loss(model, features, targets) * static_cast<double>(features.rows());
}

DualSolution solve_dual(std::span<const double> kernel, std::span<const int> y, double c, double tolerance,
                        std::size_t max_iterations) {
  const std::size_t n = y.size();
  if (kernel.size() != n * n) throw std::invalid_argument("kernel matrix must be n x n");
  if (!(c > 0.0)) throw std::invalid_argument("C must be positive");
  for (int v : y)
    if (v != 1 && v != -1) throw std::invalid_argument("dual labels must be -1 or +1");
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = kernel[i * n + i];
  DualSolver solver(
      n, [&](std::size_t i, std::vector<double>& out) { out.assign(kernel.begin() + i * n, kernel.begin() + (i + 1) * n); },
      std::move(diag), y, c);
  auto sol = solver.solve(tolerance, max_iterations);
  sol.objective = dual_objective(kernel, y, sol.alpha);
  return sol;
}

double dual_objective(std::span<const double> kernel, std::span<const int> y, std::span<const double> alpha) {
  const std::size_t n = y.size();
  double lin = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lin += alpha[i];
    for (std::size_t j = 0; j < n; ++j) quad += alpha[i] * alpha[j] * y[i] * y[j] * kernel[i * n + j];
  }
  return lin - 0.5 * quad;
}

void to_json(nlohmann::json& j, const SvmModel& m) {
  j = nlohmann::json{{"type", "svm"},
                     {"kernel", kernel_name(m.kernel)},
                     {"dim", m.dim},
                     {"bias", m.bias},
                     {"standardization", {{"mean", m.standardization.mean}, {"std", m.standardization.stddev}}},
                     {"config", m.config}};
  if (m.kernel == KernelKind::Linear) {
    j["weights"] = m.weights;
  } else {
    j["gamma"] = m.gamma;
    j["coefficients"] = m.coefficients;
    nlohmann::json svs = nlohmann::json::array();
    for (std::size_t i = 0; i < m.coefficients.size(); ++i)
      svs.push_back(std::vector<double>(m.support_vectors.begin() + static_cast<std::ptrdiff_t>(i * m.dim),
                                        m.support_vectors.begin() + static_cast<std::ptrdiff_t>((i + 1) * m.dim)));
    j["support_vectors"] = std::move(svs);
  }
}

void from_json(const nlohmann::json& j, SvmModel& m) {
  m = SvmModel{};
  m.kernel = parse_kernel(j.at("kernel").get<std::string>());
  m.dim = j.at("dim").get<std::size_t>();
  m.bias = j.at("bias").get<double>();
  m.standardization.mean = j.at("standardization").at("mean").get<std::vector<double>>();
  m.standardization.stddev = j.at("standardization").at("std").get<std::vector<double>>();
  if (j.contains("config")) m.config = j.at("config").get<SvmConfig>();
  if (m.standardization.mean.size() != m.dim || m.standardization.stddev.size() != m.dim)
    throw ConfigError("standardization length must equal model dimension");
  if (m.kernel == KernelKind::Linear) {
    m.weights = j.at("weights").get<std::vector<double>>();
    if (m.weights.size() != m.dim) throw ConfigError("weight vector length must equal model dimension");
  } else {
    m.gamma = j.at("gamma").get<double>();
    m.coefficients = j.at("coefficients").get<std::vector<double>>();
    const auto& svs = j.at("support_vectors");
    if (svs.size() != m.coefficients.size()) throw ConfigError("one coefficient per support vector required");
    for (const auto& sv : svs) {
      const auto v = sv.get<std::vector<double>>();
      if (v.size() != m.dim) throw ConfigError("support vector length must equal model dimension");
      m.support_vectors.insert(m.support_vectors.end(), v.begin(), v.end());
    }
  }
}

}  // namespace ntl
