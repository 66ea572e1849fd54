// Command-line front end: train/eval/experiment/gradcheck/inspect plus an
// optimizer shoot-out.  Every numeric flag can also come from the
// environment with an UNFIS_ prefix (UNFIS_SEED, UNFIS_RULES, ...).

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "unfis/data.hpp"
#include "unfis/eval.hpp"
#include "unfis/init.hpp"
#include "unfis/jacobian.hpp"
#include "unfis/model.hpp"
#include "unfis/optimizer.hpp"
#include "unfis/rng.hpp"
#include "unfis/rules.hpp"
#include "unfis/serialize.hpp"
#include "unfis/sha256.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string data_path;
  std::string schema_path;
  std::string out_dir;
  int rules = 2;
  std::string optimizer = "gqlm";
  int batch = 32;
  int iterations = 100;
  double damping = 1e3;
  double step = 1e-3;
  double momentum = 0.9;
  double epsilon = 1e-12;
  double fraction = 0.7;
  std::uint64_t seed = 0;
  bool stratified = false;
  bool fnn = false;
};

void add_data_options(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--dataset", o.data_path, "dataset CSV")
      ->required()
      ->envname("UNFIS_DATASET");
  cmd->add_option("--schema", o.schema_path, "dataset schema JSON")
      ->required()
      ->envname("UNFIS_SCHEMA");
}

void add_train_options(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--rules", o.rules, "number of fuzzy rules R")
      ->check(CLI::PositiveNumber)
      ->envname("UNFIS_RULES");
  cmd->add_option("--optimizer", o.optimizer, "gqlm | lm | sgd | momentum")
      ->check(CLI::IsMember({"gqlm", "lm", "sgd", "momentum"}))
      ->envname("UNFIS_OPTIMIZER");
  cmd->add_option("--batch", o.batch, "mini-batch size M")
      ->check(CLI::PositiveNumber)
      ->envname("UNFIS_BATCH");
  cmd->add_option("--iters", o.iterations, "training iterations")
      ->check(CLI::NonNegativeNumber)
      ->envname("UNFIS_ITERS");
  cmd->add_option("--lambda", o.damping, "trust-region damping lambda")
      ->envname("UNFIS_LAMBDA");
  cmd->add_option("--eta", o.step, "step scale eta")
      ->envname("UNFIS_ETA");
  cmd->add_option("--beta", o.momentum, "momentum beta")
      ->envname("UNFIS_BETA");
  cmd->add_option("--epsilon", o.epsilon, "gate regularizer epsilon")
      ->envname("UNFIS_EPSILON");
  cmd->add_option("--fraction", o.fraction, "train split fraction")
      ->envname("UNFIS_FRACTION");
  cmd->add_option("--seed", o.seed, "random seed")->envname("UNFIS_SEED");
  cmd->add_flag("--stratified", o.stratified,
                "stratify the split by class (off for reproduction runs)");
  cmd->add_flag("--fnn", o.fnn,
                "disable feature-selection gates (plain fuzzy network)");
}

unfis::TrainConfig make_config(const CommonOpts& o) {
  unfis::TrainConfig cfg;
  cfg.optimizer = unfis::optimizer_from_string(o.optimizer);
  cfg.rule_count = o.rules;
  cfg.batch_size = o.batch;
  cfg.max_iterations = o.iterations;
  cfg.damping = o.damping;
  cfg.step_scale = o.step;
  cfg.momentum = o.momentum;
  cfg.epsilon = o.epsilon;
  cfg.selection_enabled = !o.fnn;
  cfg.seed = o.seed;
  cfg.validate();
  return cfg;
}

// Reproducible record of how a run was produced (no timestamps on purpose:
// rerunning with the same seed must leave the output directory identical).
void write_snapshot(const fs::path& dir, const std::string& command,
                    const CommonOpts& o) {
  json snap;
  snap["tool"] = "unfis";
  snap["version"] = UNFIS_VERSION;
  snap["command"] = command;
  snap["data"] = o.data_path;
  snap["data_sha256"] = unfis::sha256_file(o.data_path);
  snap["schema"] = o.schema_path;
  snap["schema_sha256"] = unfis::sha256_file(o.schema_path);
  snap["options"] = {
      {"rules", o.rules},         {"optimizer", o.optimizer},
      {"batch", o.batch},         {"iters", o.iterations},
      {"damping", o.damping},     {"step", o.step},
      {"momentum", o.momentum},   {"epsilon", o.epsilon},
      {"fraction", o.fraction},   {"seed", o.seed},
      {"stratified", o.stratified}, {"fnn", o.fnn}};
  unfis::write_text_file((dir / "run.json").string(), snap.dump(2) + "\n");
}

int cmd_train(const CommonOpts& o, int repetition) {
  const unfis::DatasetSchema schema = unfis::DatasetSchema::load(o.schema_path);
  const unfis::Dataset data = unfis::load_dataset(o.data_path, schema);
  const unfis::TrainConfig base_cfg = make_config(o);

  unfis::SplitSpec spec;
  spec.train_fraction = o.fraction;
  spec.seed = o.seed;
  spec.repetition = repetition;
  spec.stratified = o.stratified;
  const unfis::SplitIndices idx =
      unfis::split(data.sample_count(), data.label_index, spec);
  const unfis::SplitData sd = unfis::normalize_split(data, idx);

  unfis::TrainConfig cfg = base_cfg;
  cfg.seed = o.seed + static_cast<std::uint64_t>(repetition);
  const unfis::InitResult init = unfis::init_params(sd.train_x, sd.train_y, cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const unfis::TrainResult trained =
      unfis::train(sd.train_x, sd.train_y, cfg, init.params, &sd.test_x,
                   &sd.test_y);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  const double train_acc =
      unfis::accuracy_percent(trained.params, sd.train_x, sd.train_y);
  const double test_acc =
      unfis::accuracy_percent(trained.params, sd.test_x, sd.test_y);
  std::optional<double> test_auc;
  if (data.positive_class >= 0) {
    test_auc = unfis::auc_from_counts(unfis::confusion(
        trained.params, sd.test_x, sd.test_y, data.positive_class));
  }

  std::ostringstream summary;
  summary << data.name << " [" << (o.fnn ? "fnn" : "unfis") << "] optimizer="
          << o.optimizer << " R=" << o.rules << " seed=" << o.seed << "\n"
          << "train rows " << idx.train.size() << ", test rows "
          << idx.test.size() << " (dropped " << data.dropped_rows << ")\n"
          << std::fixed << std::setprecision(2) << "train accuracy "
          << train_acc << " %\ntest accuracy  " << test_acc << " %\n";
  if (test_auc.has_value()) {
    summary << "test auc       " << std::setprecision(4) << *test_auc << "\n";
  }
  summary << std::setprecision(2) << "training time  " << elapsed << " s\n"
          << "active features per rule:";
  const Eigen::VectorXd n_af = trained.params.active_feature_counts();
  for (Eigen::Index i = 0; i < n_af.size(); ++i) {
    summary << ' ' << std::setprecision(2) << n_af[i];
  }
  summary << "\n";
  std::cout << summary.str();

  if (!o.out_dir.empty()) {
    const fs::path dir(o.out_dir);
    fs::create_directories(dir);
    unfis::ModelDocument doc;
    doc.params = trained.params;
    doc.stats = sd.stats;
    doc.feature_names = data.feature_names;
    doc.class_names = data.class_names;
    doc.positive_class = data.positive_class;
    doc.dataset = data.name;
    unfis::save_model(doc, (dir / "model.json").string());
    unfis::write_text_file((dir / "history.csv").string(),
                           trained.history.to_csv());
    const unfis::RuleReport rules = unfis::extract_rules(
        trained.params, sd.stats, data.feature_names, data.class_names);
    unfis::write_text_file((dir / "rules.txt").string(), rules.to_text());
    unfis::write_text_file((dir / "rules.json").string(), rules.to_json());
    unfis::write_text_file((dir / "init.txt").string(),
                           init.report.to_text(data.feature_names));
    unfis::write_text_file((dir / "summary.txt").string(), summary.str());
    write_snapshot(dir, "train", o);
    std::cout << "wrote " << (dir / "model.json").string() << "\n";
  }
  return 0;
}

int cmd_eval(const std::string& model_path, const CommonOpts& o,
             bool as_json, const std::string& predictions_path) {
  const unfis::ModelDocument doc = unfis::load_model(model_path);
  const unfis::DatasetSchema schema = unfis::DatasetSchema::load(o.schema_path);
  const unfis::Dataset data = unfis::load_dataset(o.data_path, schema);
  if (data.feature_count() != doc.params.input_count) {
    unfis::fail(unfis::ErrorCategory::shape,
                "dataset width does not match the model");
  }
  const Eigen::MatrixXd X = doc.stats.apply(data.features);
  const double acc = unfis::accuracy_percent(doc.params, X, data.labels);
  std::optional<double> auc;
  if (doc.positive_class >= 0) {
    auc = unfis::auc_from_counts(
        unfis::confusion(doc.params, X, data.labels, doc.positive_class));
  }

  if (as_json) {
    json out;
    out["model"] = model_path;
    out["data"] = o.data_path;
    out["rows"] = data.sample_count();
    out["accuracy"] = acc;
    if (auc.has_value()) out["auc"] = *auc;
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "rows " << data.sample_count() << "\naccuracy "
              << std::fixed << std::setprecision(2) << acc << " %\n";
    if (auc.has_value()) {
      std::cout << "auc      " << std::setprecision(4) << *auc << "\n";
    }
  }

  if (!predictions_path.empty()) {
    std::ostringstream out;
    out << "row,label,predicted";
    for (const std::string& c : doc.class_names) out << ",p_" << c;
    out << "\n";
    for (int k = 0; k < data.sample_count(); ++k) {
      const Eigen::VectorXd p =
          unfis::forward(doc.params, X.row(k).transpose()).probabilities;
      Eigen::Index predicted = 0;
      p.maxCoeff(&predicted);
      out << k << ','
          << doc.class_names[static_cast<std::size_t>(
                 data.label_index[static_cast<std::size_t>(k)])]
          << ',' << doc.class_names[static_cast<std::size_t>(predicted)];
      for (Eigen::Index c = 0; c < p.size(); ++c) {
        out << ',' << std::setprecision(6) << p[c];
      }
      out << "\n";
    }
    unfis::write_text_file(predictions_path, out.str());
    std::cout << "wrote " << predictions_path << "\n";
  }
  return 0;
}

int cmd_experiment(const CommonOpts& o, int reps, bool with_fnn,
                   int threads) {
  const unfis::DatasetSchema schema = unfis::DatasetSchema::load(o.schema_path);
  const unfis::Dataset data = unfis::load_dataset(o.data_path, schema);
  unfis::TrainConfig cfg = make_config(o);

  const unfis::ExperimentSummary main_summary = unfis::run_experiment(
      data, cfg, reps, o.seed, o.fraction, o.stratified, threads);
  std::cout << main_summary.to_text();

  std::string csv = main_summary.to_csv();
  std::string text = main_summary.to_text();

  if (with_fnn) {
    unfis::TrainConfig fnn_cfg = cfg;
    fnn_cfg.selection_enabled = !cfg.selection_enabled;
    const unfis::ExperimentSummary other = unfis::run_experiment(
        data, fnn_cfg, reps, o.seed, o.fraction, o.stratified, threads);
    std::cout << other.to_text();
    const double gap = main_summary.mean_accuracy - other.mean_accuracy;
    std::cout << "paired accuracy gap (" << main_summary.mode << " - "
              << other.mode << "): " << std::fixed << std::setprecision(2)
              << gap << " points\n";
    csv += other.to_csv();
    text += other.to_text();
  }

  if (!o.out_dir.empty()) {
    const fs::path dir(o.out_dir);
    fs::create_directories(dir);
    unfis::write_text_file((dir / "summary.csv").string(), csv);
    unfis::write_text_file((dir / "summary.txt").string(), text);
    write_snapshot(dir, "experiment", o);
    std::cout << "wrote " << (dir / "summary.csv").string() << "\n";
  }
  return 0;
}

int cmd_compare_optim(const CommonOpts& o, int reps, int threads) {
  const unfis::DatasetSchema schema = unfis::DatasetSchema::load(o.schema_path);
  const unfis::Dataset data = unfis::load_dataset(o.data_path, schema);

  std::vector<unfis::ExperimentSummary> results;
  for (const char* name : {"gqlm", "lm", "sgd", "momentum"}) {
    CommonOpts local = o;
    local.optimizer = name;
    unfis::TrainConfig cfg = make_config(local);
    results.push_back(unfis::run_experiment(data, cfg, reps, o.seed,
                                            o.fraction, o.stratified,
                                            threads));
  }

  std::cout << data.name << ": " << reps
            << " repetitions per optimizer, shared splits (seed " << o.seed
            << ")\n";
  std::cout << std::left << std::setw(10) << "optimizer" << std::setw(12)
            << "mean-acc" << std::setw(12) << "std-acc"
            << "delta-vs-gqlm\n";
  std::string csv =
      "optimizer,mean_accuracy,std_accuracy,delta_vs_gqlm\n";
  const double reference = results.front().mean_accuracy;
  for (const unfis::ExperimentSummary& s : results) {
    const double delta = s.mean_accuracy - reference;
    std::cout << std::left << std::setw(10)
              << to_string(s.config.optimizer) << std::fixed
              << std::setprecision(2) << std::setw(12) << s.mean_accuracy
              << std::setw(12) << s.std_accuracy << std::showpos << delta
              << std::noshowpos << "\n";
    std::ostringstream row;
    row << to_string(s.config.optimizer) << ',' << std::setprecision(17)
        << s.mean_accuracy << ',' << s.std_accuracy << ',' << delta << "\n";
    csv += row.str();
  }

  if (!o.out_dir.empty()) {
    const fs::path dir(o.out_dir);
    fs::create_directories(dir);
    unfis::write_text_file((dir / "compare.csv").string(), csv);
    write_snapshot(dir, "compare-optim", o);
    std::cout << "wrote " << (dir / "compare.csv").string() << "\n";
  }
  return 0;
}

int cmd_gradcheck(int rules, int inputs, int classes, std::uint64_t seed,
                  int samples, double step, double tolerance, bool fnn,
                  bool as_csv) {
  const unfis::ModelParams params =
      unfis::ModelParams::random(rules, inputs, classes, seed, !fnn);
  unfis::Rng rng(seed + 1);
  Eigen::MatrixXd X(samples, inputs);
  for (int k = 0; k < samples; ++k) {
    for (int j = 0; j < inputs; ++j) X(k, j) = rng.uniform(-2.0, 2.0);
  }
  const unfis::GradientCheckReport report =
      unfis::gradient_check(params, X, step, tolerance);
  std::cout << (as_csv ? report.to_csv() : report.to_text());
  return report.pass ? 0 : 1;
}

int cmd_inspect(const std::string& model_path, double threshold,
                bool as_json) {
  const unfis::ModelDocument doc = unfis::load_model(model_path);
  const unfis::RuleReport report = unfis::extract_rules(
      doc.params, doc.stats, doc.feature_names, doc.class_names, threshold);
  std::cout << (as_json ? report.to_json() : report.to_text());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UNFIS: neuro-fuzzy classifier with per-rule feature selection"};
  app.set_version_flag("--version", std::string(UNFIS_VERSION));
  app.require_subcommand(1);

  CommonOpts opts;
  int repetition = 0;
  int reps = 30;
  int threads = 0;
  bool with_fnn = false;
  bool as_json = false;
  std::string model_path;
  std::string predictions_path;

  CLI::App* train = app.add_subcommand("train", "train one model on one split");
  add_data_options(train, opts);
  add_train_options(train, opts);
  train->add_option("--out", opts.out_dir, "output directory");
  train->add_option("--rep", repetition, "repetition index folded into the split seed");

  CLI::App* eval = app.add_subcommand("eval", "evaluate a saved model on a CSV");
  eval->add_option("--model", model_path, "model JSON")->required();
  add_data_options(eval, opts);
  eval->add_flag("--json", as_json, "machine-readable output");
  eval->add_option("--predictions", predictions_path,
                   "write per-row predictions to this CSV");

  CLI::App* experiment =
      app.add_subcommand("experiment", "repeated split/train/eval harness");
  add_data_options(experiment, opts);
  add_train_options(experiment, opts);
  experiment->add_option("--out", opts.out_dir, "output directory");
  experiment->add_option("--reps", reps, "number of repetitions")
      ->check(CLI::PositiveNumber)
      ->envname("UNFIS_REPS");
  experiment->add_flag("--with-fnn", with_fnn,
                       "also run with gates disabled, on the same splits");
  experiment->add_option("--threads", threads, "worker threads (0 = auto)")
      ->envname("UNFIS_THREADS");

  CLI::App* compare = app.add_subcommand(
      "compare-optim", "run all four optimizers on shared splits");
  add_data_options(compare, opts);
  add_train_options(compare, opts);
  compare->add_option("--out", opts.out_dir, "output directory");
  compare->add_option("--reps", reps, "number of repetitions")
      ->check(CLI::PositiveNumber)
      ->envname("UNFIS_REPS");
  compare->add_option("--threads", threads, "worker threads (0 = auto)")
      ->envname("UNFIS_THREADS");

  int gc_rules = 2, gc_inputs = 3, gc_classes = 2, gc_samples = 5;
  double gc_step = 1e-6, gc_tol = 1e-4;
  std::uint64_t gc_seed = 1;
  bool gc_fnn = false, gc_csv = false;
  CLI::App* gradcheck = app.add_subcommand(
      "gradcheck", "compare analytic and finite-difference Jacobians");
  gradcheck->add_option("--rules", gc_rules)->check(CLI::PositiveNumber);
  gradcheck->add_option("--inputs", gc_inputs)->check(CLI::PositiveNumber);
  gradcheck->add_option("--classes", gc_classes)->check(CLI::PositiveNumber);
  gradcheck->add_option("--samples", gc_samples)->check(CLI::PositiveNumber);
  gradcheck->add_option("--step", gc_step, "finite-difference step");
  gradcheck->add_option("--tol", gc_tol, "relative tolerance per block");
  gradcheck->add_option("--seed", gc_seed)->envname("UNFIS_SEED");
  gradcheck->add_flag("--fnn", gc_fnn, "check the gate-free parameterization");
  gradcheck->add_flag("--csv", gc_csv, "CSV output");

  double threshold = 0.5;
  bool inspect_json = false;
  CLI::App* inspect =
      app.add_subcommand("inspect", "print the fuzzy rules of a saved model");
  inspect->add_option("--model", model_path, "model JSON")->required();
  inspect->add_option("--threshold", threshold,
                      "gate threshold separating used from ignored features");
  inspect->add_flag("--json", inspect_json, "machine-readable rule report");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(opts, repetition);
    if (eval->parsed())
      return cmd_eval(model_path, opts, as_json, predictions_path);
    if (experiment->parsed())
      return cmd_experiment(opts, reps, with_fnn, threads);
    if (compare->parsed()) return cmd_compare_optim(opts, reps, threads);
    if (gradcheck->parsed())
      return cmd_gradcheck(gc_rules, gc_inputs, gc_classes, gc_seed,
                           gc_samples, gc_step, gc_tol, gc_fnn, gc_csv);
    if (inspect->parsed())
      return cmd_inspect(model_path, threshold, inspect_json);
  } catch (const unfis::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return unfis::exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
