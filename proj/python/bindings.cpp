#include <sstream>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ntl/classifier.hpp"
#include "ntl/cli.hpp"
#include "ntl/data.hpp"
#include "ntl/error.hpp"
#include "ntl/experiment.hpp"
#include "ntl/fuzzy.hpp"
#include "ntl/metrics.hpp"
#include "ntl/resample.hpp"
#include "ntl/rules.hpp"
#include "ntl/svm.hpp"

namespace py = pybind11;

namespace {

py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_py(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

py::array_t<double> as_array(const ntl::FeatureMatrix& f) {
  py::array_t<double> a({f.rows(), f.window});
  std::copy(f.values.begin(), f.values.end(), a.mutable_data());
  return a;
}

ntl::FeatureMatrix from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
  if (x.ndim() != 2) throw std::invalid_argument("features must be a 2-D array");
  ntl::FeatureMatrix f;
  f.window = static_cast<std::size_t>(x.shape(1));
  f.values.assign(x.data(), x.data() + x.size());
  f.customer_ids.resize(static_cast<std::size_t>(x.shape(0)));
  return f;
}

}  // namespace

PYBIND11_MODULE(_ntlbench, m) {
  m.doc() = "Non-technical loss detection: features, rule/fuzzy/SVM classifiers and proportion sweeps";

  static py::handle error = py::exception<ntl::Error>(m, "NtlError").release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ntl::ValidationError& e) {
      std::ostringstream msg;
      msg << e.what();
      for (const auto& v : e.violations()) msg << "\n  " << v;
      py::set_error(error, msg.str().c_str());
    } catch (const ntl::Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::class_<ntl::Dataset>(m, "Dataset")
      .def_property_readonly("customer_count", [](const ntl::Dataset& d) { return d.series.size(); })
      .def_property_readonly("inspection_count", [](const ntl::Dataset& d) { return d.inspections.size(); })
      .def_property_readonly("positive_count", &ntl::Dataset::positive_count)
      .def("save", [](const ntl::Dataset& d, const std::filesystem::path& consumption,
                      const std::filesystem::path& inspections) { ntl::save_dataset(d, consumption, inspections); });

  m.def(
      "generate_synthetic",
      [](const py::dict& config) { return ntl::generate_synthetic(from_py(config).get<ntl::SynthConfig>()); },
      py::arg("config") = py::dict(), "Seeded synthetic dataset; keys as in the generator's JSON config.");
  m.def("load_dataset", &ntl::load_dataset, py::arg("consumption"), py::arg("inspections"));

  m.def(
      "feature_matrix",
      [](const ntl::Dataset& d, std::size_t window) {
        const auto built = ntl::build_feature_matrix(d, window);
        return py::make_tuple(built.features.customer_ids, as_array(built.features), built.targets.labels);
      },
      py::arg("dataset"), py::arg("window") = ntl::kDefaultWindow,
      "(customer_ids, features[n, window], labels) for inspected customers with a complete window.");

  m.def(
      "attributes",
      [](const ntl::Dataset& d) {
        const auto pool = ntl::build_pool(d, ntl::kDefaultWindow, ntl::AttributeCatalog::shipped());
        py::list rows;
        for (std::size_t i = 0; i < pool.size(); ++i) {
          py::dict row;
          row["customer_id"] = pool.customer_ids[i];
          row["label"] = pool.labels[i];
          const auto& a = pool.attributes[i];
          for (std::size_t k = 0; k < a.size(); ++k) row[py::str(a.names()[k])] = a.values()[k];
          rows.append(row);
        }
        return rows;
      },
      py::arg("dataset"), "Shipped catalog attributes for each labeled customer.");

  m.def("shipped_rules", [] { return std::string(ntl::shipped_rules_text()); });
  m.def(
      "normalize_rules",
      [](const std::string& text) { return ntl::print_rules(ntl::parse_rules(text, ntl::AttributeCatalog::shipped())); },
      py::arg("text"), "Parses a rule file against the shipped catalog and prints it canonically.");
  m.def(
      "classify_boolean",
      [](const std::string& text, const std::map<std::string, double>& attrs) {
        ntl::AttributeVector a;
        for (const auto& [k, v] : attrs) a.set(k, v);
        const auto d = ntl::classify_boolean(ntl::parse_rules(text, ntl::AttributeCatalog::shipped()), a);
        return py::make_tuple(d.label, d.fired);
      },
      py::arg("rules"), py::arg("attributes"), "(label, fired rule names).");

  m.def(
      "metrics",
      [](const std::vector<int>& predictions, const std::vector<int>& labels) {
        const auto cm = ntl::confusion(predictions, labels);
        nlohmann::json j = ntl::metrics(cm);
        j["confusion"] = cm;
        return to_py(j);
      },
      py::arg("predictions"), py::arg("labels"));
  m.def("single_point_auc", &ntl::single_point_auc, py::arg("recall"), py::arg("specificity"));
  m.def(
      "defuzzify_centroid", [](const std::vector<double>& curve) { return ntl::defuzzify_centroid(curve); },
      py::arg("curve"));

  m.def("default_levels", &ntl::default_levels);
  m.def(
      "subsample",
      [](const std::vector<int>& labels, double level, std::size_t size, std::uint64_t seed) {
        return ntl::subsample(labels, ntl::ProportionLevel(level), size, seed);
      },
      py::arg("labels"), py::arg("level"), py::arg("size"), py::arg("seed"));

  m.def(
      "train_svm",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x, const std::vector<int>& y,
         const py::dict& config) {
        const auto cfg = from_py(config).get<ntl::SvmConfig>();
        return to_py(ntl::train_svm(from_array(x), ntl::TargetVector{y}, cfg));
      },
      py::arg("features"), py::arg("labels"), py::arg("config") = py::dict(), "Serialized model as a dict.");
  m.def(
      "svm_decision",
      [](const py::dict& model, const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
        return ntl::predict_svm(from_py(model).get<ntl::SvmModel>(), from_array(x)).scores;
      },
      py::arg("model"), py::arg("features"));

  m.def(
      "run_experiment",
      [](const py::dict& config) {
        auto outputs = ntl::run_experiment(ntl::ExperimentConfig::from_json(from_py(config)));
        return py::make_tuple(to_py(outputs.report), outputs.curves_csv);
      },
      py::arg("config"), "(report, curves_csv) for an experiment config dict.");

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = ntl::cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in-process: (exit_code, stdout, stderr).");
}
