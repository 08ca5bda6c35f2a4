#include "ntl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <functional>
#include <set>
#include <sstream>
#include <thread>

#include "ntl/error.hpp"
#include "ntl/random.hpp"
#include "ntl/resample.hpp"

namespace ntl {

std::string to_string(ClassifierType t) {
  switch (t) {
    case ClassifierType::Boolean: return "boolean";
    case ClassifierType::Fuzzy: return "fuzzy";
    case ClassifierType::FuzzySgd: return "fuzzy_sgd";
    case ClassifierType::Svm: return "svm";
  }
  return "?";
}

ClassifierType classifier_type_from_string(const std::string& s) {
  if (s == "boolean") return ClassifierType::Boolean;
  if (s == "fuzzy") return ClassifierType::Fuzzy;
  if (s == "fuzzy_sgd") return ClassifierType::FuzzySgd;
  if (s == "svm") return ClassifierType::Svm;
  throw ConfigError("unknown classifier type '" + s + "' (expected boolean, fuzzy, fuzzy_sgd or svm)");
}

// ---------------------------------------------------------------------------
// Config

void ExperimentConfig::validate() const {
  const bool has_paths = consumption_path.has_value() || inspections_path.has_value();
  if (has_paths && synthetic) throw ConfigError("give either dataset paths or a synthetic config, not both");
  if (!synthetic && !(consumption_path && inspections_path))
    throw ConfigError("dataset needs both consumption and inspections paths, or a synthetic config");
  if (synthetic) synthetic->validate();
  if (classifiers.empty()) throw ConfigError("no classifiers configured");
  std::set<std::string> names;
  for (const auto& c : classifiers) {
    if (!is_valid_identifier(c.name)) throw ConfigError("classifier name '" + c.name + "' must match [A-Za-z0-9_-]+");
    if (!names.insert(c.name).second) throw ConfigError("duplicate classifier name '" + c.name + "'");
    if (!(c.threshold > 0.0 && c.threshold < 1.0)) throw ConfigError("fuzzy threshold must lie in (0, 1)");
    if (c.type == ClassifierType::FuzzySgd) c.sgd.validate();
    if (c.type == ClassifierType::Svm) c.svm.validate();
  }
  if (levels.empty()) throw ConfigError("no proportion levels configured");
  std::set<double> seen;
  for (double l : levels) {
    ProportionLevel{l};
    if (!seen.insert(l).second) throw ConfigError("duplicate proportion level " + format_double(l));
  }
  if (target_size == 0) throw ConfigError("target_size must be positive");
  if (window == 0) throw ConfigError("window must be at least one month");
  if (folds == 0) throw ConfigError("folds must be positive");
  ratios.validate();
  if (jobs == 0) throw ConfigError("jobs must be positive");
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  static const std::set<std::string> kKeys{"dataset", "synthetic", "catalog",     "classifiers", "levels", "target_size",
                                           "window",  "folds",     "ratios",      "master_seed", "output_dir"};
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (!kKeys.contains(k)) throw ConfigError("unknown experiment config key '" + k + "'");

  ExperimentConfig c;
  try {
    if (j.contains("dataset")) {
      const auto& d = j.at("dataset");
      c.consumption_path = resolve(base_dir, d.at("consumption").get<std::string>());
      c.inspections_path = resolve(base_dir, d.at("inspections").get<std::string>());
    }
    if (j.contains("synthetic")) c.synthetic = j.at("synthetic").get<SynthConfig>();
    if (j.contains("catalog")) c.catalog_path = resolve(base_dir, j.at("catalog").get<std::string>());
    for (const auto& cj : j.at("classifiers")) {
      ClassifierSpec s;
      s.type = classifier_type_from_string(cj.at("type").get<std::string>());
      s.name = cj.value("name", to_string(s.type));
      if (cj.contains("rules")) s.rules_path = resolve(base_dir, cj.at("rules").get<std::string>());
      s.threshold = cj.value("threshold", 0.5);
      if (cj.contains("sgd")) s.sgd = cj.at("sgd").get<SgdConfig>();
      if (cj.contains("svm")) s.svm = cj.at("svm").get<SvmConfig>();
      c.classifiers.push_back(std::move(s));
    }
    c.levels = j.contains("levels") ? j.at("levels").get<std::vector<double>>() : default_levels();
    c.target_size = j.value("target_size", c.target_size);
    c.window = j.value("window", c.window);
    c.folds = j.value("folds", c.folds);
    if (j.contains("ratios")) {
      const auto& r = j.at("ratios");
      c.ratios.train = r.at("train").get<double>();
      c.ratios.validation = r.at("validation").get<double>();
      c.ratios.test = r.at("test").get<double>();
    }
    c.master_seed = j.value("master_seed", c.master_seed);
    if (j.contains("output_dir")) c.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed experiment config: ") + e.what());
  }
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  if (synthetic) j["synthetic"] = *synthetic;
  if (consumption_path)
    j["dataset"] = {{"consumption", consumption_path->generic_string()},
                    {"inspections", inspections_path->generic_string()}};
  if (catalog_path) j["catalog"] = catalog_path->generic_string();
  j["classifiers"] = nlohmann::json::array();
  for (const auto& s : classifiers) {
    nlohmann::json cj{{"name", s.name}, {"type", to_string(s.type)}};
    if (s.rules_path) cj["rules"] = s.rules_path->generic_string();
    if (s.type == ClassifierType::Fuzzy || s.type == ClassifierType::FuzzySgd) cj["threshold"] = s.threshold;
    if (s.type == ClassifierType::FuzzySgd) cj["sgd"] = s.sgd;
    if (s.type == ClassifierType::Svm) cj["svm"] = s.svm;
    j["classifiers"].push_back(std::move(cj));
  }
  j["levels"] = levels;
  j["target_size"] = target_size;
  j["window"] = window;
  j["folds"] = folds;
  j["ratios"] = {{"train", ratios.train}, {"validation", ratios.validation}, {"test", ratios.test}};
  j["master_seed"] = master_seed;
  return j;
}

// ---------------------------------------------------------------------------
// Classifier construction

RuleSet load_rules(const ClassifierSpec& spec, const AttributeCatalog& catalog) {
  if (!spec.rules_path) return parse_rules(shipped_rules_text(), catalog);
  return parse_rules(read_text_file(*spec.rules_path), catalog);
}

AttributeCatalog load_catalog(const std::optional<std::filesystem::path>& path) {
  if (!path) return AttributeCatalog::shipped();
  try {
    return AttributeCatalog::from_json(nlohmann::json::parse(read_text_file(*path)));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed attribute catalog '" + path->string() + "': " + e.what());
  }
}

std::shared_ptr<const Classifier> make_direct_classifier(const ClassifierSpec& spec, const AttributeCatalog& catalog,
                                                         const std::map<std::string, AttributeStats>& stats) {
  switch (spec.type) {
    case ClassifierType::Boolean:
      return std::make_shared<BooleanClassifier>(load_rules(spec, catalog), catalog);
    case ClassifierType::Fuzzy:
      return std::make_shared<FuzzyClassifier>(fuzzify_ruleset(load_rules(spec, catalog), stats), spec.threshold,
                                               catalog);
    default:
      return nullptr;
  }
}

Trainer make_trainer(const ClassifierSpec& spec, const ExamplePool& pool, const AttributeCatalog& catalog,
                     const std::map<std::string, AttributeStats>& stats) {
  auto labels_of = [&pool](std::span<const std::size_t> ids) {
    std::vector<int> l;
    l.reserve(ids.size());
    for (std::size_t id : ids) l.push_back(pool.labels[id]);
    return l;
  };
  if (spec.type == ClassifierType::FuzzySgd) {
    return [&pool, labels_of, catalog, initial = fuzzify_ruleset(load_rules(spec, catalog), stats),
            sgd = spec.sgd, threshold = spec.threshold](std::span<const std::size_t> train,
                                                        std::span<const std::size_t> validation,
                                                        std::uint64_t seed) -> std::shared_ptr<const Classifier> {
      auto attrs_of = [&pool](std::span<const std::size_t> ids) {
        std::vector<AttributeVector> a;
        a.reserve(ids.size());
        for (std::size_t id : ids) a.push_back(pool.attributes[id]);
        return a;
      };
      const auto ta = attrs_of(train), va = attrs_of(validation);
      const auto tl = labels_of(train), vl = labels_of(validation);
      SgdConfig cfg = sgd;
      cfg.seed = seed;
      cfg.threshold = threshold;
      auto result = sgd_optimize(initial, {ta, tl}, {va, vl}, cfg);
      return std::make_shared<FuzzyClassifier>(std::move(result.system), threshold, catalog);
    };
  }
  if (spec.type == ClassifierType::Svm) {
    return [&pool, labels_of, svm = spec.svm](std::span<const std::size_t> train,
                                              std::span<const std::size_t> validation,
                                              std::uint64_t seed) -> std::shared_ptr<const Classifier> {
      SvmConfig cfg = svm;
      cfg.seed = seed;
      auto model = train_svm(select_rows(pool.features, train), TargetVector{labels_of(train)}, cfg,
                             select_rows(pool.features, validation), TargetVector{labels_of(validation)});
      return std::make_shared<SvmClassifier>(std::move(model));
    };
  }
  throw ConfigError("classifier type '" + to_string(spec.type) + "' is not trainable");
}

// ---------------------------------------------------------------------------
// Runner

namespace {

constexpr std::uint64_t kSampleTag = 1;
constexpr std::uint64_t kTrainTag = 2;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t level_key(double level) { return std::bit_cast<std::uint64_t>(level); }

void run_tasks(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& task) {
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w)
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) task(i);
    });
  for (auto& t : workers) t.join();
}

struct LevelSample {
  double level = 0.0;
  std::size_t size = 0;
  std::size_t positives = 0;
  bool capped = false;
  std::uint64_t seed = 0;
  std::vector<std::size_t> ids;
  std::optional<std::string> error;
};

struct Prepared {
  const ClassifierSpec* spec = nullptr;
  std::shared_ptr<const Classifier> direct;  // rule-based only
  Trainer trainer;                           // trainable only
};

struct Evaluation {
  ConfusionMatrix cm;
  MetricReport metrics;
  std::size_t evaluated = 0;
};

Evaluation evaluate(const Classifier& model, const ExamplePool& pool, std::span<const std::size_t> ids) {
  std::vector<int> truth;
  truth.reserve(ids.size());
  for (std::size_t id : ids) truth.push_back(pool.labels[id]);
  Evaluation e;
  e.cm = confusion(model.predict(pool, ids), truth);
  e.metrics = metrics(e.cm);
  e.evaluated = ids.size();
  return e;
}

nlohmann::json evaluation_json(const Evaluation& e) {
  return {{"metrics", e.metrics}, {"confusion", e.cm}, {"evaluated", e.evaluated}};
}

std::string level_text(double level) { return format_double(level); }

std::string optional_text(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::string confusion_csv(const ConfusionMatrix& cm) {
  const auto n = cm.normalized();
  std::ostringstream out;
  out << "actual,predicted_0,predicted_1,rate_0,rate_1\n";
  out << "0," << cm.tn << ',' << cm.fp << ',' << optional_text(n.tnr) << ',' << optional_text(n.fpr) << '\n';
  out << "1," << cm.fn << ',' << cm.tp << ',' << optional_text(n.fnr) << ',' << optional_text(n.tpr) << '\n';
  return out.str();
}

struct CurvePoint {
  double level;
  std::string classifier;
  Evaluation eval;
};

std::string curves_csv(const std::vector<CurvePoint>& points) {
  std::ostringstream out;
  out << "level,classifier,auc,tnr,fpr,fnr,tpr\n";
  for (const auto& p : points) {
    const auto n = p.eval.cm.normalized();
    out << level_text(p.level) << ',' << p.classifier << ',' << optional_text(p.eval.metrics.auc) << ','
        << optional_text(n.tnr) << ',' << optional_text(n.fpr) << ',' << optional_text(n.fnr) << ','
        << optional_text(n.tpr) << '\n';
  }
  return out.str();
}

struct DirectCell {
  std::size_t classifier = 0, level = 0;
  nlohmann::json json;
  std::optional<Evaluation> eval;
};

struct TrainCell {
  std::size_t classifier = 0, level = 0;
  nlohmann::json json;
  std::optional<CrossValidationResult> cv;
};

struct RetestCell {
  std::size_t classifier = 0, selection = 0, level = 0;
  nlohmann::json json;
  std::optional<Evaluation> eval;
};

constexpr const char* kSelections[] = {"by_test", "by_validation"};

}  // namespace

ExperimentOutputs run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto started = Clock::now();

  const Dataset dataset = config.synthetic ? generate_synthetic(*config.synthetic)
                                           : load_dataset(*config.consumption_path, *config.inspections_path);
  const AttributeCatalog catalog = load_catalog(config.catalog_path);
  const ExamplePool pool = build_pool(dataset, config.window, catalog);
  const auto stats = compute_attribute_stats(pool.attributes);
  const std::size_t pool_pos = pool.positives();
  const std::size_t pool_neg = pool.size() - pool_pos;

  nlohmann::json report;
  report["config"] = config.to_json();
  report["master_seed"] = config.master_seed;
  report["pool"] = {{"examples", pool.size()},
                    {"positives", pool_pos},
                    {"negatives", pool_neg},
                    {"excluded", pool.excluded.size()}};
  nlohmann::json warnings = nlohmann::json::array();

  // Level samples.
  std::vector<LevelSample> samples;
  for (double level : config.levels) {
    LevelSample s;
    s.level = level;
    s.seed = derive_seed(config.master_seed, {kSampleTag, level_key(level)});
    s.size = std::min(config.target_size, max_feasible_size(pool_pos, pool_neg, level));
    s.capped = s.size < config.target_size;
    if (s.capped)
      warnings.push_back("level " + level_text(level) + ": target size " + std::to_string(config.target_size) +
                         " capped to " + std::to_string(s.size) + " by pool supply");
    if (s.size == 0) {
      s.error = "pool cannot supply any sample at this level";
    } else {
      s.ids = subsample(pool.labels, ProportionLevel(level), s.size, s.seed);
      for (std::size_t id : s.ids) s.positives += static_cast<std::size_t>(pool.labels[id]);
    }
    samples.push_back(std::move(s));
  }
  report["levels"] = nlohmann::json::array();
  for (const auto& s : samples) {
    nlohmann::json lj{{"level", s.level},         {"sample_size", s.size}, {"positives", s.positives},
                      {"negatives", s.size - s.positives}, {"capped", s.capped},   {"seed", s.seed}};
    if (s.error) lj["error"] = *s.error;
    report["levels"].push_back(std::move(lj));
  }

  // Classifiers.
  std::vector<Prepared> prepared;
  nlohmann::json classifiers_json = nlohmann::json::array();
  for (const auto& spec : config.classifiers) {
    Prepared p;
    p.spec = &spec;
    nlohmann::json cj{{"name", spec.name}, {"type", to_string(spec.type)}};
    if (spec.type == ClassifierType::Fuzzy || spec.type == ClassifierType::FuzzySgd) {
      nlohmann::json census = nlohmann::json::object();
      for (const auto& [count, vars] : membership_census(fuzzify_ruleset(load_rules(spec, catalog), stats)))
        census[std::to_string(count)] = vars;
      cj["membership_census"] = census;
    }
    p.direct = make_direct_classifier(spec, catalog, stats);
    if (!p.direct) p.trainer = make_trainer(spec, pool, catalog, stats);
    classifiers_json.push_back(std::move(cj));
    prepared.push_back(std::move(p));
  }
  report["classifiers"] = classifiers_json;

  // Phase 1: direct evaluation and per-level training.
  std::vector<DirectCell> direct;
  std::vector<TrainCell> training;
  for (std::size_t c = 0; c < prepared.size(); ++c)
    for (std::size_t l = 0; l < samples.size(); ++l) {
      if (prepared[c].direct)
        direct.push_back({c, l, {}, std::nullopt});
      else
        training.push_back({c, l, {}, std::nullopt});
    }

  const std::size_t phase1 = direct.size() + training.size();
  run_tasks(phase1, config.jobs, [&](std::size_t task) {
    const auto t0 = Clock::now();
    if (task < direct.size()) {
      auto& cell = direct[task];
      const auto& s = samples[cell.level];
      nlohmann::json j{{"classifier", config.classifiers[cell.classifier].name}, {"level", s.level}};
      try {
        if (s.error) throw Error(*s.error);
        cell.eval = evaluate(*prepared[cell.classifier].direct, pool, s.ids);
        j["status"] = "ok";
        j.update(evaluation_json(*cell.eval));
      } catch (const std::exception& e) {
        j["status"] = "error";
        j["error"] = e.what();
      }
      j["runtime_seconds"] = seconds_since(t0);
      cell.json = std::move(j);
      return;
    }
    auto& cell = training[task - direct.size()];
    const auto& spec = config.classifiers[cell.classifier];
    const auto& s = samples[cell.level];
    const std::uint64_t seed =
        derive_seed(config.master_seed, {kTrainTag, hash_name(spec.name), level_key(s.level)});
    nlohmann::json j{{"classifier", spec.name}, {"level", s.level}, {"seed", seed}};
    if (s.level == 0.0 || s.level == 1.0) {
      j["status"] = "skipped";
      j["reason"] = "skipped: untrainable (single-class sample)";
    } else {
      try {
        if (s.error) throw Error(*s.error);
        CrossValidationConfig cv_cfg{config.folds, config.ratios, seed};
        cell.cv = cross_validate(pool, s.ids, prepared[cell.classifier].trainer, cv_cfg);
        const auto& sel = cell.cv->selected();
        j["status"] = "ok";
        j["selected_fold"] = cell.cv->selected_fold;
        j["validation"] = sel.validation;
        j["test"] = sel.test;
        j["test_confusion"] = sel.test_confusion;
        j["folds"] = cell.cv->folds;
        j["model"] = "models/" + spec.name + "_" + level_text(s.level) + ".json";
      } catch (const std::exception& e) {
        j["status"] = "error";
        j["error"] = e.what();
      }
    }
    j["runtime_seconds"] = seconds_since(t0);
    cell.json = std::move(j);
  });

  // Phase 2: pick the best trained level per classifier and re-test it everywhere.
  struct Selection {
    std::size_t classifier = 0, selection = 0;
    const TrainCell* source = nullptr;
  };
  std::vector<Selection> selections;
  nlohmann::json selection_json = nlohmann::json::object();
  for (std::size_t c = 0; c < prepared.size(); ++c) {
    if (prepared[c].direct) continue;
    nlohmann::json sj = nlohmann::json::object();
    for (std::size_t which = 0; which < 2; ++which) {
      const TrainCell* best = nullptr;
      std::optional<double> best_auc;
      for (const auto& cell : training) {
        if (cell.classifier != c || !cell.cv) continue;
        const auto& sel = cell.cv->selected();
        const auto auc = which == 0 ? sel.test.auc : sel.validation.auc;
        if (!best || (auc && (!best_auc || *auc > *best_auc))) {
          best = &cell;
          best_auc = auc;
        }
      }
      if (best) {
        selections.push_back({c, which, best});
        sj[kSelections[which]] = {{"trained_level", samples[best->level].level},
                                  {"auc", best_auc ? nlohmann::json(*best_auc) : nlohmann::json()}};
      } else {
        sj[kSelections[which]] = nullptr;
        warnings.push_back(config.classifiers[c].name + ": no level trained successfully; nothing to re-test");
      }
    }
    selection_json[config.classifiers[c].name] = std::move(sj);
  }

  std::vector<RetestCell> retests;
  for (std::size_t k = 0; k < selections.size(); ++k)
    for (std::size_t l = 0; l < samples.size(); ++l) retests.push_back({k, selections[k].selection, l, {}, std::nullopt});

  run_tasks(retests.size(), config.jobs, [&](std::size_t task) {
    const auto t0 = Clock::now();
    auto& cell = retests[task];
    const auto& sel = selections[cell.classifier];
    const auto& s = samples[cell.level];
    const auto& cv = *sel.source->cv;
    nlohmann::json j{{"classifier", config.classifiers[sel.classifier].name},
                     {"selection", kSelections[sel.selection]},
                     {"trained_level", samples[sel.source->level].level},
                     {"level", s.level}};
    try {
      if (s.error) throw Error(*s.error);
      std::set<std::size_t> seen(cv.selected_split.train.begin(), cv.selected_split.train.end());
      seen.insert(cv.selected_split.validation.begin(), cv.selected_split.validation.end());
      std::vector<std::size_t> ids;
      for (std::size_t id : s.ids)
        if (!seen.contains(id)) ids.push_back(id);
      j["excluded_training_examples"] = s.ids.size() - ids.size();
      if (ids.empty()) throw Error("every example at this level was used to train the model");
      cell.eval = evaluate(*cv.best, pool, ids);
      j["status"] = "ok";
      j.update(evaluation_json(*cell.eval));
    } catch (const std::exception& e) {
      j["status"] = "error";
      j["error"] = e.what();
    }
    j["runtime_seconds"] = seconds_since(t0);
    cell.json = std::move(j);
  });

  // Assembly, in config order.
  ExperimentOutputs out;
  std::vector<CurvePoint> curve;
  report["cells"] = nlohmann::json::array();
  for (const auto& cell : direct) {
    report["cells"].push_back(cell.json);
    if (!cell.eval) continue;
    const auto& name = config.classifiers[cell.classifier].name;
    const double level = samples[cell.level].level;
    curve.push_back({level, name, *cell.eval});
    out.confusion_csvs["confusion_" + name + "_" + level_text(level) + ".csv"] = confusion_csv(cell.eval->cm);
  }
  report["training"] = nlohmann::json::array();
  for (const auto& cell : training) {
    report["training"].push_back(cell.json);
    if (!cell.cv) continue;
    const auto& name = config.classifiers[cell.classifier].name;
    const double level = samples[cell.level].level;
    const auto& sel = cell.cv->selected();
    curve.push_back({level, name + "_cv", {sel.test_confusion, sel.test, sel.test_size}});
    out.confusion_csvs["confusion_" + name + "_cv_" + level_text(level) + ".csv"] = confusion_csv(sel.test_confusion);
    nlohmann::json model = cell.cv->best->to_json();
    out.models[name + "_" + level_text(level) + ".json"] = std::move(model);
  }
  report["selection"] = selection_json;
  report["retests"] = nlohmann::json::array();
  for (const auto& cell : retests) {
    report["retests"].push_back(cell.json);
    if (!cell.eval) continue;
    const auto& sel = selections[cell.classifier];
    const auto label = config.classifiers[sel.classifier].name + "_" + kSelections[sel.selection];
    const double level = samples[cell.level].level;
    curve.push_back({level, label, *cell.eval});
    out.confusion_csvs["confusion_" + label + "_" + level_text(level) + ".csv"] = confusion_csv(cell.eval->cm);
  }
  report["warnings"] = warnings;
  report["runtime_seconds"] = seconds_since(started);

  out.report = std::move(report);
  out.curves_csv = curves_csv(curve);
  return out;
}

void write_outputs(const ExperimentOutputs& outputs, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text_file(dir / "report.json", outputs.report.dump(2) + "\n");
  write_text_file(dir / "curves.csv", outputs.curves_csv);
  for (const auto& [name, text] : outputs.confusion_csvs) write_text_file(dir / name, text);
  for (const auto& [name, model] : outputs.models) write_text_file(dir / "models" / name, model.dump(2) + "\n");
}

nlohmann::json strip_runtime(const nlohmann::json& report) {
  if (report.is_object()) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [k, v] : report.items())
      if (k != "runtime_seconds") out[k] = strip_runtime(v);
    return out;
  }
  if (report.is_array()) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& v : report) out.push_back(strip_runtime(v));
    return out;
  }
  return report;
}

}  // namespace ntl
