// Python bindings for the UNFIS core.  Thin: every piece of behavior lives
// in the C++ library, this file only maps types and releases the GIL around
// the long-running calls.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "unfis/data.hpp"
#include "unfis/eval.hpp"
#include "unfis/init.hpp"
#include "unfis/jacobian.hpp"
#include "unfis/model.hpp"
#include "unfis/optimizer.hpp"
#include "unfis/rules.hpp"
#include "unfis/serialize.hpp"

namespace py = pybind11;
using namespace unfis;

PYBIND11_MODULE(_core, m) {
  m.doc() = "UNFIS: neuro-fuzzy classifier with embedded feature selection";
  m.attr("__version__") = UNFIS_VERSION;

  py::register_exception<Error>(m, "UnfisError");

  // ---- scalar pieces ------------------------------------------------------
  m.def("logistic_gate", &logistic_gate, py::arg("s"));
  m.def("gaussian_membership", &gaussian_membership, py::arg("x"),
        py::arg("center"), py::arg("width"));
  m.def("selected_membership", &selected_membership, py::arg("membership"),
        py::arg("gate"), py::arg("epsilon") = kDefaultEpsilon);
  m.def("softmax", &softmax, py::arg("logits"));
  m.attr("MEMBERSHIP_FLOOR") = kMembershipFloor;

  // ---- model --------------------------------------------------------------
  py::class_<ModelParams>(m, "ModelParams")
      .def_static("zeros", &ModelParams::zeros, py::arg("rules"),
                  py::arg("inputs"), py::arg("classes"),
                  py::arg("selection") = true,
                  py::arg("epsilon") = kDefaultEpsilon)
      .def_static("random", &ModelParams::random, py::arg("rules"),
                  py::arg("inputs"), py::arg("classes"), py::arg("seed"),
                  py::arg("selection") = true,
                  py::arg("epsilon") = kDefaultEpsilon)
      .def_static("unpack", &ModelParams::unpack, py::arg("packed"),
                  py::arg("rules"), py::arg("inputs"), py::arg("classes"),
                  py::arg("selection") = true,
                  py::arg("epsilon") = kDefaultEpsilon)
      .def_readonly("rule_count", &ModelParams::rule_count)
      .def_readonly("input_count", &ModelParams::input_count)
      .def_readonly("class_count", &ModelParams::class_count)
      .def_readonly("selection_enabled", &ModelParams::selection_enabled)
      .def_readwrite("epsilon", &ModelParams::epsilon)
      .def_readwrite("centers", &ModelParams::centers)
      .def_readwrite("widths", &ModelParams::widths)
      .def_readwrite("gate_logits", &ModelParams::gate_logits)
      .def_readwrite("coefficients", &ModelParams::coefficients)
      .def_readwrite("thresholds", &ModelParams::thresholds)
      .def("gates", &ModelParams::gates)
      .def("active_feature_counts", &ModelParams::active_feature_counts)
      .def("pack", &ModelParams::pack)
      .def("set_packed", &ModelParams::set_packed, py::arg("packed"))
      .def("parameter_count", &ModelParams::parameter_count)
      .def("validate", &ModelParams::validate)
      .def("__repr__", [](const ModelParams& p) {
        return "<ModelParams R=" + std::to_string(p.rule_count) +
               " n=" + std::to_string(p.input_count) +
               " C=" + std::to_string(p.class_count) +
               (p.selection_enabled ? "" : " (selection off)") + ">";
      });

  py::class_<ForwardTrace>(m, "ForwardTrace")
      .def_readonly("input", &ForwardTrace::input)
      .def_readonly("memberships", &ForwardTrace::memberships)
      .def_readonly("gates", &ForwardTrace::gates)
      .def_readonly("gated", &ForwardTrace::gated)
      .def_readonly("firings", &ForwardTrace::firings)
      .def_readonly("normalized", &ForwardTrace::normalized)
      .def_readonly("local_outputs", &ForwardTrace::local_outputs)
      .def_readonly("weighted_outputs", &ForwardTrace::weighted_outputs)
      .def_readonly("logits", &ForwardTrace::logits)
      .def_readonly("probabilities", &ForwardTrace::probabilities);

  m.def("forward", &forward, py::arg("params"), py::arg("x"));
  m.def("predict_probabilities", &predict_probabilities, py::arg("params"),
        py::arg("X"), py::call_guard<py::gil_scoped_release>());

  // ---- jacobian -----------------------------------------------------------
  m.def(
      "jacobian", [](const ModelParams& p, const Eigen::VectorXd& x) {
        return jacobian_rows(p, forward(p, x));
      },
      py::arg("params"), py::arg("x"));
  m.def("finite_difference_jacobian", &finite_difference_jacobian,
        py::arg("params"), py::arg("x"), py::arg("step") = 1e-6);

  py::class_<BlockCheck>(m, "BlockCheck")
      .def_readonly("block", &BlockCheck::block)
      .def_readonly("max_abs_error", &BlockCheck::max_abs_error)
      .def_readonly("max_rel_error", &BlockCheck::max_rel_error)
      .def_readonly("passed", &BlockCheck::pass);

  py::class_<GradientCheckReport>(m, "GradientCheckReport")
      .def_readonly("step", &GradientCheckReport::step)
      .def_readonly("tolerance", &GradientCheckReport::tolerance)
      .def_readonly("samples", &GradientCheckReport::samples)
      .def_readonly("blocks", &GradientCheckReport::blocks)
      .def_readonly("passed", &GradientCheckReport::pass)
      .def("to_text", &GradientCheckReport::to_text)
      .def("to_csv", &GradientCheckReport::to_csv);

  m.def("gradient_check", &gradient_check, py::arg("params"),
        py::arg("samples"), py::arg("step") = 1e-6,
        py::arg("tolerance") = 1e-4,
        py::call_guard<py::gil_scoped_release>());

  // ---- training -----------------------------------------------------------
  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_property(
          "optimizer",
          [](const TrainConfig& c) { return std::string(to_string(c.optimizer)); },
          [](TrainConfig& c, const std::string& name) {
            c.optimizer = optimizer_from_string(name);
          })
      .def_readwrite("rule_count", &TrainConfig::rule_count)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("max_iterations", &TrainConfig::max_iterations)
      .def_readwrite("damping", &TrainConfig::damping)
      .def_readwrite("step_scale", &TrainConfig::step_scale)
      .def_readwrite("momentum", &TrainConfig::momentum)
      .def_readwrite("epsilon", &TrainConfig::epsilon)
      .def_readwrite("selection_enabled", &TrainConfig::selection_enabled)
      .def_readwrite("seed", &TrainConfig::seed)
      .def("validate", &TrainConfig::validate);

  py::class_<TrainHistory>(m, "TrainHistory")
      .def_readonly("optimizer", &TrainHistory::optimizer)
      .def_readonly("loss", &TrainHistory::loss)
      .def_readonly("train_accuracy", &TrainHistory::train_accuracy)
      .def_readonly("test_accuracy", &TrainHistory::test_accuracy)
      .def_readonly("seconds", &TrainHistory::seconds)
      .def("to_csv", &TrainHistory::to_csv);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("params", &TrainResult::params)
      .def_readonly("history", &TrainResult::history);

  m.def(
      "train",
      [](const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
         const TrainConfig& cfg, const ModelParams& initial,
         std::optional<Eigen::MatrixXd> test_x,
         std::optional<Eigen::MatrixXd> test_y) {
        py::gil_scoped_release release;
        return train(X, Y, cfg, initial, test_x ? &*test_x : nullptr,
                     test_y ? &*test_y : nullptr);
      },
      py::arg("X"), py::arg("Y"), py::arg("config"), py::arg("initial"),
      py::arg("test_x") = std::nullopt, py::arg("test_y") = std::nullopt);

  m.def("cross_entropy", &cross_entropy, py::arg("params"), py::arg("X"),
        py::arg("targets"));
  m.def("accuracy_percent", &accuracy_percent, py::arg("params"), py::arg("X"),
        py::arg("targets"));

  // ---- initialization -----------------------------------------------------
  py::class_<InitReport>(m, "InitReport")
      .def_readonly("centroids", &InitReport::centroids)
      .def_readonly("width_estimates", &InitReport::width_estimates)
      .def_readonly("cluster_sizes", &InitReport::cluster_sizes)
      .def_readonly("neighbor_count", &InitReport::neighbor_count)
      .def("to_text", &InitReport::to_text,
           py::arg("feature_names") = std::vector<std::string>{});

  py::class_<InitResult>(m, "InitResult")
      .def_readonly("params", &InitResult::params)
      .def_readonly("report", &InitResult::report);

  m.def("init_params", &init_params, py::arg("X"), py::arg("Y"),
        py::arg("config"), py::call_guard<py::gil_scoped_release>());

  // ---- data ---------------------------------------------------------------
  py::class_<DatasetSchema>(m, "DatasetSchema")
      .def_static("load", &DatasetSchema::load, py::arg("path"))
      .def_readonly("name", &DatasetSchema::name)
      .def_readonly("label_column", &DatasetSchema::label_column)
      .def_readonly("class_names", &DatasetSchema::class_names)
      .def("positive_class_index", &DatasetSchema::positive_class_index);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init<>())
      .def_readwrite("name", &Dataset::name)
      .def_readwrite("features", &Dataset::features)
      .def_readwrite("labels", &Dataset::labels)
      .def_readwrite("label_index", &Dataset::label_index)
      .def_readwrite("feature_names", &Dataset::feature_names)
      .def_readwrite("class_names", &Dataset::class_names)
      .def_readwrite("positive_class", &Dataset::positive_class)
      .def_readonly("dropped_rows", &Dataset::dropped_rows)
      .def("sample_count", &Dataset::sample_count)
      .def("feature_count", &Dataset::feature_count)
      .def("class_count", &Dataset::class_count);

  m.def(
      "load_dataset",
      [](const std::string& csv, const std::string& schema) {
        return load_dataset(csv, DatasetSchema::load(schema));
      },
      py::arg("csv_path"), py::arg("schema_path"));

  py::class_<SplitSpec>(m, "SplitSpec")
      .def(py::init<>())
      .def_readwrite("train_fraction", &SplitSpec::train_fraction)
      .def_readwrite("seed", &SplitSpec::seed)
      .def_readwrite("repetition", &SplitSpec::repetition)
      .def_readwrite("stratified", &SplitSpec::stratified);

  py::class_<SplitIndices>(m, "SplitIndices")
      .def_readonly("train", &SplitIndices::train)
      .def_readonly("test", &SplitIndices::test);

  m.def("split", &split, py::arg("sample_count"), py::arg("label_index"),
        py::arg("spec"));

  py::class_<NormalizationStats>(m, "NormalizationStats")
      .def(py::init<>())
      .def_readwrite("mean", &NormalizationStats::mean)
      .def_readwrite("std", &NormalizationStats::std)
      .def("apply",
           static_cast<Eigen::MatrixXd (NormalizationStats::*)(
               const Eigen::MatrixXd&) const>(&NormalizationStats::apply),
           py::arg("X"))
      .def("invert", &NormalizationStats::invert, py::arg("z"));

  m.def("fit_normalization", &fit_normalization, py::arg("X"));

  py::class_<SplitData>(m, "SplitData")
      .def_readonly("train_x", &SplitData::train_x)
      .def_readonly("train_y", &SplitData::train_y)
      .def_readonly("test_x", &SplitData::test_x)
      .def_readonly("test_y", &SplitData::test_y)
      .def_readonly("stats", &SplitData::stats);

  m.def("normalize_split", &normalize_split, py::arg("dataset"),
        py::arg("indices"));

  // ---- evaluation / experiments ------------------------------------------
  py::class_<RepetitionResult>(m, "RepetitionResult")
      .def_readonly("repetition", &RepetitionResult::repetition)
      .def_readonly("test_accuracy", &RepetitionResult::test_accuracy)
      .def_readonly("test_auc", &RepetitionResult::test_auc)
      .def_readonly("active_features", &RepetitionResult::active_features)
      .def_readonly("final_loss", &RepetitionResult::final_loss)
      .def_readonly("seconds", &RepetitionResult::seconds);

  py::class_<ExperimentSummary>(m, "ExperimentSummary")
      .def_readonly("dataset", &ExperimentSummary::dataset)
      .def_readonly("mode", &ExperimentSummary::mode)
      .def_readonly("base_seed", &ExperimentSummary::base_seed)
      .def_readonly("repetitions", &ExperimentSummary::repetitions)
      .def_readonly("runs", &ExperimentSummary::runs)
      .def_readonly("mean_accuracy", &ExperimentSummary::mean_accuracy)
      .def_readonly("std_accuracy", &ExperimentSummary::std_accuracy)
      .def_readonly("mean_auc", &ExperimentSummary::mean_auc)
      .def_readonly("std_auc", &ExperimentSummary::std_auc)
      .def_readonly("mean_active_features",
                    &ExperimentSummary::mean_active_features)
      .def_readonly("min_rule_active_features",
                    &ExperimentSummary::min_rule_active_features)
      .def("to_text", &ExperimentSummary::to_text)
      .def("to_csv", &ExperimentSummary::to_csv);

  m.def("run_experiment", &run_experiment, py::arg("dataset"),
        py::arg("config"), py::arg("repetitions"), py::arg("base_seed"),
        py::arg("train_fraction") = 0.7, py::arg("stratified") = false,
        py::arg("max_threads") = 0,
        py::call_guard<py::gil_scoped_release>());

  m.def("rank_auc", &rank_auc, py::arg("scores"), py::arg("is_positive"));

  // ---- rules --------------------------------------------------------------
  py::class_<RuleFeature>(m, "RuleFeature")
      .def_readonly("name", &RuleFeature::name)
      .def_readonly("gate", &RuleFeature::gate)
      .def_readonly("center", &RuleFeature::center)
      .def_readonly("width", &RuleFeature::width)
      .def_readonly("selected", &RuleFeature::selected);

  py::class_<RuleConsequent>(m, "RuleConsequent")
      .def_readonly("class_name", &RuleConsequent::class_name)
      .def_readonly("bias", &RuleConsequent::bias)
      .def_readonly("slopes", &RuleConsequent::slopes);

  py::class_<RuleEntry>(m, "RuleEntry")
      .def_readonly("index", &RuleEntry::index)
      .def_readonly("features", &RuleEntry::features)
      .def_readonly("active_count", &RuleEntry::active_count)
      .def_readonly("consequents", &RuleEntry::consequents);

  py::class_<RuleReport>(m, "RuleReport")
      .def_readonly("gate_threshold", &RuleReport::gate_threshold)
      .def_readonly("rules", &RuleReport::rules)
      .def("to_text", &RuleReport::to_text)
      .def("to_json", &RuleReport::to_json);

  m.def("extract_rules", &extract_rules, py::arg("params"), py::arg("stats"),
        py::arg("feature_names"), py::arg("class_names"),
        py::arg("gate_threshold") = 0.5);

  // ---- persistence --------------------------------------------------------
  py::class_<ModelDocument>(m, "ModelDocument")
      .def(py::init<>())
      .def_readwrite("params", &ModelDocument::params)
      .def_readwrite("stats", &ModelDocument::stats)
      .def_readwrite("feature_names", &ModelDocument::feature_names)
      .def_readwrite("class_names", &ModelDocument::class_names)
      .def_readwrite("positive_class", &ModelDocument::positive_class)
      .def_readwrite("dataset", &ModelDocument::dataset);

  m.def("save_model", &save_model, py::arg("document"), py::arg("path"));
  m.def("load_model", &load_model, py::arg("path"));
  m.def("model_to_json", &to_json, py::arg("document"));
  m.def("model_from_json", &model_from_json, py::arg("text"));
}
