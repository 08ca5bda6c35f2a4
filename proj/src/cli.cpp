#include "ntl/cli.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ntl/classifier.hpp"
#include "ntl/data.hpp"
#include "ntl/error.hpp"
#include "ntl/experiment.hpp"
#include "ntl/random.hpp"
#include "ntl/resample.hpp"

namespace ntl::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::optional<std::uint64_t> parse_u64(std::string_view text) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) return std::nullopt;
  return v;
}

/// --seed beats NTLBENCH_SEED beats whatever the config file says.
std::optional<std::uint64_t> resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return flag;
  if (const char* env = std::getenv("NTLBENCH_SEED"); env && *env) {
    auto v = parse_u64(env);
    if (!v) throw UsageError(std::string("NTLBENCH_SEED must be an unsigned integer, got '") + env + "'");
    return v;
  }
  return std::nullopt;
}

std::vector<double> parse_levels(const std::string& csv) {
  std::vector<double> levels;
  std::stringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    double v = 0.0;
    const auto* end = item.data() + item.size();
    const auto [ptr, ec] = std::from_chars(item.data(), end, v);
    if (ec != std::errc() || ptr != end || item.empty())
      throw UsageError("--levels expects comma-separated fractions, got '" + item + "'");
    levels.push_back(v);
  }
  if (levels.empty()) throw UsageError("--levels is empty");
  return levels;
}

nlohmann::json read_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

struct DataFlags {
  fs::path consumption;
  fs::path inspections;

  void add(CLI::App* app, bool inspections_required = true) {
    app->add_option("--consumption", consumption, "Consumption CSV")->required();
    auto* opt = app->add_option("--inspections", inspections, "Inspections CSV");
    if (inspections_required) opt->required();
  }

  Dataset load() const {
    if (!inspections.empty()) return load_dataset(consumption, inspections);
    std::istringstream none(std::string(kInspectionsHeader) + "\n");
    auto c = std::ifstream(consumption, std::ios::binary);
    if (!c) throw Error("cannot open '" + consumption.string() + "' for reading");
    return read_dataset(c, none);
  }
};

std::string join_row(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  return line + "\n";
}

// ---------------------------------------------------------------------------

struct GenCmd {
  std::optional<fs::path> config;
  fs::path out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> customers, months;
  std::optional<double> ntl_fraction;

  void add(CLI::App* app) {
    app->add_option("--config", config, "Synthetic generator config (JSON)")->check(CLI::ExistingFile);
    app->add_option("--out", out, "Output directory")->required();
    app->add_option("--seed", seed, "Generator seed");
    app->add_option("--customers", customers, "Number of inspected customers");
    app->add_option("--months", months, "Months of readings per customer");
    app->add_option("--ntl-fraction", ntl_fraction, "Fraction of NTL customers");
  }

  int run(std::ostream& err) const {
    SynthConfig cfg;
    if (config) cfg = read_json(*config).get<SynthConfig>();
    if (customers) cfg.n_customers = *customers;
    if (months) cfg.months = *months;
    if (ntl_fraction) cfg.ntl_fraction = *ntl_fraction;
    if (auto s = resolve_seed(seed)) cfg.seed = *s;
    cfg.validate();
    const auto ds = generate_synthetic(cfg);
    fs::create_directories(out);
    save_dataset(ds, out / "consumption.csv", out / "inspections.csv");
    write_text_file(out / "synth_config.json", nlohmann::json(cfg).dump(2) + "\n");
    err << "generated " << ds.series.size() << " customers (" << ds.positive_count() << " NTL) into "
        << out.string() << "\n";
    return kExitOk;
  }
};

struct ValidateCmd {
  DataFlags data;

  void add(CLI::App* app) { data.add(app); }

  int run(std::ostream& out) const {
    const auto ds = data.load();
    out << "ok: " << ds.series.size() << " customers, " << ds.inspections.size() << " inspections ("
        << ds.positive_count() << " NTL)\n";
    return kExitOk;
  }
};

struct FeaturesCmd {
  DataFlags data;
  fs::path out;
  std::size_t window = kDefaultWindow;
  std::optional<fs::path> catalog;

  void add(CLI::App* app) {
    data.add(app);
    app->add_option("--out", out, "Output directory")->required();
    app->add_option("--window", window, "Months of daily-average features")->capture_default_str();
    app->add_option("--catalog", catalog, "Attribute catalog (JSON)")->check(CLI::ExistingFile);
  }

  int run(std::ostream& err) const {
    const auto ds = data.load();
    const auto cat = load_catalog(catalog);
    const auto pool = build_pool(ds, window, cat);
    const auto latest = latest_inspections(ds);

    std::string features = "customer_id,inspection_date,label";
    for (std::size_t m = 1; m <= window; ++m) features += ",m" + std::to_string(m);
    features += "\n";
    std::string attributes = join_row([&] {
      std::vector<std::string> h{"customer_id", "label"};
      for (const auto& n : cat.names()) h.push_back(n);
      return h;
    }());
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const auto& id = pool.customer_ids[i];
      std::vector<std::string> row{id, latest.at(id).inspection_date.iso(), std::to_string(pool.labels[i])};
      for (double v : pool.features.row(i)) row.push_back(format_double(v));
      features += join_row(row);
      std::vector<std::string> arow{id, std::to_string(pool.labels[i])};
      for (double v : pool.attributes[i].values()) arow.push_back(format_double(v));
      attributes += join_row(arow);
    }
    std::string excluded = "customer_id,reason\n";
    for (const auto& e : pool.excluded) excluded += e.customer_id + "," + e.reason + "\n";

    write_text_file(out / "features.csv", features);
    write_text_file(out / "attributes.csv", attributes);
    write_text_file(out / "excluded.csv", excluded);
    err << pool.size() << " examples, " << pool.excluded.size() << " excluded\n";
    return kExitOk;
  }
};

struct TrainCmd {
  DataFlags data;
  fs::path out;
  std::string type = "svm";
  std::optional<fs::path> config, rules, catalog;
  std::optional<std::uint64_t> seed;
  std::size_t window = kDefaultWindow;
  std::size_t folds = 10;
  std::optional<double> level;
  std::optional<std::size_t> target_size;

  void add(CLI::App* app) {
    data.add(app);
    app->add_option("--out", out, "Output directory")->required();
    app->add_option("--classifier", type, "boolean, fuzzy, fuzzy_sgd or svm")
        ->check(CLI::IsMember({"boolean", "fuzzy", "fuzzy_sgd", "svm"}))
        ->capture_default_str();
    app->add_option("--config", config, "Classifier config (JSON with svm/sgd/threshold)")->check(CLI::ExistingFile);
    app->add_option("--rules", rules, "Rule file")->check(CLI::ExistingFile);
    app->add_option("--catalog", catalog, "Attribute catalog (JSON)")->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "Cross-validation seed");
    app->add_option("--window", window, "Months of daily-average features")->capture_default_str();
    app->add_option("--folds", folds, "Cross-validation shuffles")->capture_default_str();
    app->add_option("--level", level, "Subsample to this NTL proportion before training");
    app->add_option("--target-size", target_size, "Subsample size (with --level)");
  }

  int run(std::ostream& err) const {
    ClassifierSpec spec;
    spec.type = classifier_type_from_string(type);
    spec.name = type;
    spec.rules_path = rules;
    if (config) {
      const auto j = read_json(*config);
      spec.threshold = j.value("threshold", spec.threshold);
      if (j.contains("sgd")) spec.sgd = j.at("sgd").get<SgdConfig>();
      if (j.contains("svm")) spec.svm = j.at("svm").get<SvmConfig>();
    }
    const std::uint64_t cv_seed = resolve_seed(seed).value_or(0);
    const auto ds = data.load();
    const auto cat = load_catalog(catalog);
    const auto pool = build_pool(ds, window, cat);
    const auto stats = compute_attribute_stats(pool.attributes);

    if (auto direct = make_direct_classifier(spec, cat, stats)) {
      write_text_file(out / "model.json", direct->to_json().dump(2) + "\n");
      err << "wrote " << type << " model (no training needed)\n";
      return kExitOk;
    }

    std::vector<std::size_t> sample(pool.size());
    std::iota(sample.begin(), sample.end(), std::size_t{0});
    if (level) {
      const std::size_t size = target_size.value_or(pool.size());
      sample = subsample(pool.labels, ProportionLevel(*level), size, derive_seed(cv_seed, {1}));
    }
    const auto trainer = make_trainer(spec, pool, cat, stats);
    const auto cv = cross_validate(pool, sample, trainer, {folds, {}, cv_seed});
    nlohmann::json report{{"classifier", type},
                          {"seed", cv_seed},
                          {"examples", sample.size()},
                          {"selected_fold", cv.selected_fold},
                          {"folds", cv.folds}};
    write_text_file(out / "model.json", cv.best->to_json().dump(2) + "\n");
    write_text_file(out / "training.json", report.dump(2) + "\n");
    const auto& sel = cv.selected();
    err << "selected fold " << cv.selected_fold << ": validation AUC "
        << (sel.validation.auc ? format_double(*sel.validation.auc) : "undefined") << ", test AUC "
        << (sel.test.auc ? format_double(*sel.test.auc) : "undefined") << "\n";
    return kExitOk;
  }
};

std::size_t model_window(const nlohmann::json& model, std::optional<std::size_t> flag) {
  if (model.at("type") == "svm") {
    const auto dim = model.at("dim").get<std::size_t>();
    if (flag && *flag != dim)
      throw ConfigError("model expects a " + std::to_string(dim) + "-month window, --window says " +
                        std::to_string(*flag));
    return dim;
  }
  return flag.value_or(kDefaultWindow);
}

struct ScoreCmd {
  DataFlags data;
  fs::path model_path, out;
  std::optional<std::size_t> window;
  bool all = false;

  void add(CLI::App* app) {
    data.add(app, false);
    app->add_option("--model", model_path, "Serialized model (JSON)")->required()->check(CLI::ExistingFile);
    app->add_option("--out", out, "Output directory")->required();
    app->add_option("--window", window, "Months of daily-average features");
    app->add_flag("--all", all, "Also score customers that already have inspections");
  }

  int run(std::ostream& err) const {
    const auto mj = read_json(model_path);
    const auto model = classifier_from_json(mj);
    const auto ds = data.load();
    const auto pool = build_scoring_pool(ds, model_window(mj, window), catalog_of(mj), !all);
    std::vector<std::size_t> ids(pool.size());
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    const auto scores = model->scores(pool, ids);
    std::stable_sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::string csv = "rank,customer_id,score,label\n";
    for (std::size_t r = 0; r < ids.size(); ++r) {
      const auto i = ids[r];
      csv += std::to_string(r + 1) + "," + pool.customer_ids[i] + "," + format_double(scores[i]) + "," +
             std::to_string(model->decide(scores[i])) + "\n";
    }
    write_text_file(out / "scores.csv", csv);
    err << "scored " << pool.size() << " customers (" << pool.excluded.size() << " without a complete window)\n";
    return kExitOk;
  }
};

struct EvaluateCmd {
  DataFlags data;
  fs::path model_path, out;
  std::optional<std::size_t> window;
  std::optional<std::string> levels;
  std::size_t target_size = 1000;
  std::optional<std::uint64_t> seed;

  void add(CLI::App* app) {
    data.add(app);
    app->add_option("--model", model_path, "Serialized model (JSON)")->required()->check(CLI::ExistingFile);
    app->add_option("--out", out, "Output directory")->required();
    app->add_option("--window", window, "Months of daily-average features");
    app->add_option("--levels", levels, "Comma-separated NTL proportions to resample to");
    app->add_option("--target-size", target_size, "Sample size per level")->capture_default_str();
    app->add_option("--seed", seed, "Resampling seed");
  }

  int run(std::ostream& err) const {
    const std::vector<double> level_list = levels ? parse_levels(*levels) : std::vector<double>{};
    const auto mj = read_json(model_path);
    const auto model = classifier_from_json(mj);
    const auto ds = data.load();
    const auto pool = build_pool(ds, model_window(mj, window), catalog_of(mj));
    const std::uint64_t s = resolve_seed(seed).value_or(0);

    auto one = [&](std::span<const std::size_t> ids) {
      std::vector<int> truth;
      for (std::size_t id : ids) truth.push_back(pool.labels[id]);
      const auto cm = confusion(model->predict(pool, ids), truth);
      return nlohmann::json{{"examples", ids.size()}, {"metrics", metrics(cm)}, {"confusion", cm}};
    };
    nlohmann::json report{{"model", model->type()}};
    if (!levels) {
      std::vector<std::size_t> ids(pool.size());
      std::iota(ids.begin(), ids.end(), std::size_t{0});
      report["pool"] = one(ids);
    } else {
      report["seed"] = s;
      report["levels"] = nlohmann::json::array();
      const std::size_t pos = pool.positives();
      for (double l : level_list) {
        const ProportionLevel level(l);
        const std::size_t size = std::min(target_size, max_feasible_size(pos, pool.size() - pos, l));
        nlohmann::json lj{{"level", l}};
        if (size == 0) {
          lj["error"] = "pool cannot supply any sample at this level";
        } else {
          if (size < target_size) err << "level " << format_double(l) << ": sample capped to " << size << "\n";
          lj.update(one(subsample(pool.labels, level, size, derive_seed(s, {std::bit_cast<std::uint64_t>(l)}))));
        }
        report["levels"].push_back(std::move(lj));
      }
    }
    write_text_file(out / "evaluation.json", report.dump(2) + "\n");
    err << "evaluated " << model->type() << " model on " << pool.size() << " examples\n";
    return kExitOk;
  }
};

struct SweepCmd {
  fs::path config, out;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  std::optional<std::size_t> window, target_size;
  std::optional<std::string> levels;

  void add(CLI::App* app) {
    app->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    app->add_option("--out", out, "Output directory");
    app->add_option("--seed", seed, "Master seed");
    app->add_option("--jobs", jobs, "Concurrent experiment cells")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--window", window, "Months of daily-average features");
    app->add_option("--levels", levels, "Comma-separated NTL proportions");
    app->add_option("--target-size", target_size, "Sample size per level");
  }

  int run(std::ostream& err) const {
    auto cfg = ExperimentConfig::from_json(read_json(config), config.parent_path());
    if (auto s = resolve_seed(seed)) cfg.master_seed = *s;
    if (window) cfg.window = *window;
    if (target_size) cfg.target_size = *target_size;
    if (levels) cfg.levels = parse_levels(*levels);
    if (!out.empty()) cfg.output_dir = out;
    if (cfg.output_dir.empty()) throw UsageError("sweep needs --out (or output_dir in the config)");
    cfg.jobs = jobs;
    err << "sweeping " << cfg.classifiers.size() << " classifiers over " << cfg.levels.size() << " levels\n";
    const auto outputs = run_experiment(cfg);
    for (const auto& w : outputs.report.at("warnings")) err << "warning: " << w.get<std::string>() << "\n";
    write_outputs(outputs, cfg.output_dir);
    err << "wrote " << (cfg.output_dir / "report.json").string() << " in "
        << outputs.report.at("runtime_seconds").get<double>() << " s\n";
    return kExitOk;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Non-technical loss detection benchmark", "ntlbench"};
  app.require_subcommand(1, 1);
  app.failure_message(CLI::FailureMessage::help);

  GenCmd gen;
  ValidateCmd validate;
  FeaturesCmd features;
  TrainCmd train;
  ScoreCmd score;
  EvaluateCmd evaluate;
  SweepCmd sweep;
  auto* gen_app = app.add_subcommand("gen", "Generate a synthetic dataset");
  auto* validate_app = app.add_subcommand("validate", "Check a dataset against its invariants");
  auto* features_app = app.add_subcommand("features", "Export feature and attribute tables");
  auto* train_app = app.add_subcommand("train", "Cross-validate a classifier and save the selected model");
  auto* score_app = app.add_subcommand("score", "Rank customers by a saved model's NTL score");
  auto* evaluate_app = app.add_subcommand("evaluate", "Evaluate a saved model on labeled data");
  auto* sweep_app = app.add_subcommand("sweep", "Run a proportion sweep experiment");
  gen.add(gen_app);
  validate.add(validate_app);
  features.add(features_app);
  train.add(train_app);
  score.add(score_app);
  evaluate.add(evaluate_app);
  sweep.add(sweep_app);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kExitUsage;
  }

  try {
    if (gen_app->parsed()) return gen.run(err);
    if (validate_app->parsed()) return validate.run(out);
    if (features_app->parsed()) return features.run(err);
    if (train_app->parsed()) return train.run(err);
    if (score_app->parsed()) return score.run(err);
    if (evaluate_app->parsed()) return evaluate.run(err);
    if (sweep_app->parsed()) return sweep.run(err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const ValidationError& e) {
    err << "error: dataset has " << e.violations().size() << " violation(s)\n";
    for (const auto& v : e.violations()) err << "  " << v << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace ntl::cli
