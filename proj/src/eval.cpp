#include "unfis/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <future>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace unfis {

ConfusionCounts confusion(const ModelParams& params, const Eigen::MatrixXd& X,
                          const Eigen::MatrixXd& targets, int positive_class) {
  if (X.rows() == 0) {
    fail(ErrorCategory::empty_evaluation, "confusion over an empty set");
  }
  if (positive_class < 0 || positive_class >= params.class_count) {
    fail(ErrorCategory::invalid_parameter,
         "positive class index out of range");
  }
  ConfusionCounts c;
  for (Eigen::Index k = 0; k < X.rows(); ++k) {
    const Eigen::VectorXd p =
        forward(params, X.row(k).transpose()).probabilities;
    Eigen::Index predicted = 0, truth = 0;
    p.maxCoeff(&predicted);
    targets.row(k).maxCoeff(&truth);
    const bool actual_pos = truth == positive_class;
    const bool predicted_pos = predicted == positive_class;
    if (actual_pos && predicted_pos) ++c.tp;
    else if (actual_pos) ++c.fn;
    else if (predicted_pos) ++c.fp;
    else ++c.tn;
  }
  return c;
}

double accuracy_from_counts(const ConfusionCounts& c) {
  if (c.total() == 0) {
    fail(ErrorCategory::empty_evaluation, "accuracy over zero samples");
  }
  return 100.0 * static_cast<double>(c.tp + c.tn) /
         static_cast<double>(c.total());
}

double auc_from_counts(const ConfusionCounts& c) {
  if (c.tp + c.fn == 0 || c.tn + c.fp == 0) {
    fail(ErrorCategory::undefined_metric,
         "AUC undefined: a class is absent from the evaluation set");
  }
  const double sensitivity =
      static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  const double specificity =
      static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
  return 0.5 * (sensitivity + specificity);
}

double rank_auc(const Eigen::VectorXd& scores,
                const std::vector<int>& is_positive) {
  if (scores.size() != static_cast<Eigen::Index>(is_positive.size())) {
    fail(ErrorCategory::shape, "scores and labels differ in length");
  }
  long pos = 0, neg = 0;
  for (int flag : is_positive) (flag ? pos : neg) += 1;
  if (pos == 0 || neg == 0) {
    fail(ErrorCategory::undefined_metric,
         "rank AUC undefined without both classes");
  }
  // Sum of ranks of the positives, with midranks for ties.
  std::vector<int> order(is_positive.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() &&
           scores[order[j + 1]] == scores[order[i]]) {
      ++j;
    }
    const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) {
      if (is_positive[static_cast<std::size_t>(order[t])]) rank_sum += midrank;
    }
    i = j + 1;
  }
  return (rank_sum - 0.5 * static_cast<double>(pos) *
                         static_cast<double>(pos + 1)) /
         (static_cast<double>(pos) * static_cast<double>(neg));
}

double mean_of(const std::vector<double>& values) {
  if (values.empty()) {
    fail(ErrorCategory::empty_evaluation, "mean of an empty list");
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double std_of(const std::vector<double>& values) {
  if (values.empty()) {
    fail(ErrorCategory::empty_evaluation, "std of an empty list");
  }
  if (values.size() == 1) return 0.0;
  const double m = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

namespace {

RepetitionResult run_one(const Dataset& data, const TrainConfig& config,
                         std::uint64_t base_seed, int repetition,
                         double train_fraction, bool stratified) {
  const auto t0 = std::chrono::steady_clock::now();

  SplitSpec spec;
  spec.train_fraction = train_fraction;
  spec.seed = base_seed;
  spec.repetition = repetition;
  spec.stratified = stratified;
  const SplitIndices indices = split(data.sample_count(), data.label_index, spec);
  const SplitData sd = normalize_split(data, indices);

  TrainConfig cfg = config;
  cfg.seed = base_seed + static_cast<std::uint64_t>(repetition);
  const InitResult init = init_params(sd.train_x, sd.train_y, cfg);
  const TrainResult trained = train(sd.train_x, sd.train_y, cfg, init.params);

  RepetitionResult r;
  r.repetition = repetition;
  r.test_accuracy = accuracy_percent(trained.params, sd.test_x, sd.test_y);
  if (data.positive_class >= 0) {
    r.test_auc = auc_from_counts(
        confusion(trained.params, sd.test_x, sd.test_y, data.positive_class));
  }
  r.active_features = trained.params.active_feature_counts();
  r.final_loss = trained.history.loss.empty() ? 0.0 : trained.history.loss.back();
  r.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return r;
}

}  // namespace

ExperimentSummary run_experiment(const Dataset& data, const TrainConfig& config,
                                 int repetitions, std::uint64_t base_seed,
                                 double train_fraction, bool stratified,
                                 int max_threads) {
  config.validate();
  if (repetitions < 1) {
    fail(ErrorCategory::invalid_parameter, "repetitions must be >= 1");
  }

  ExperimentSummary summary;
  summary.dataset = data.name;
  summary.mode = config.selection_enabled ? "unfis" : "fnn";
  summary.config = config;
  summary.base_seed = base_seed;
  summary.repetitions = repetitions;
  summary.runs.resize(static_cast<std::size_t>(repetitions));

  int workers = max_threads > 0
                    ? max_threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, repetitions);

  std::atomic<int> next{0};
  std::vector<std::future<void>> futures;
  std::mutex error_mutex;
  std::exception_ptr first_error;

  for (int w = 0; w < workers; ++w) {
    futures.push_back(std::async(std::launch::async, [&]() {
      for (int r = next.fetch_add(1); r < repetitions; r = next.fetch_add(1)) {
        try {
          try {
            summary.runs[static_cast<std::size_t>(r)] = run_one(
                data, config, base_seed, r, train_fraction, stratified);
          } catch (const Error& e) {
            // Tag which repetition blew up before propagating.
            throw Error(e.category(), "repetition " + std::to_string(r) +
                                          ": " + e.what());
          }
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    }));
  }
  for (auto& f : futures) f.get();
  if (first_error) std::rethrow_exception(first_error);

  std::vector<double> accs, aucs, active_means, active_mins;
  for (const RepetitionResult& r : summary.runs) {
    accs.push_back(r.test_accuracy);
    if (r.test_auc.has_value()) aucs.push_back(*r.test_auc);
    active_means.push_back(r.active_features.mean());
    active_mins.push_back(r.active_features.minCoeff());
  }
  summary.mean_accuracy = mean_of(accs);
  summary.std_accuracy = std_of(accs);
  if (static_cast<int>(aucs.size()) == repetitions) {
    summary.mean_auc = mean_of(aucs);
    summary.std_auc = std_of(aucs);
  }
  summary.mean_active_features = mean_of(active_means);
  summary.min_rule_active_features = mean_of(active_mins);
  return summary;
}

std::string ExperimentSummary::to_text() const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << dataset << " [" << mode << "] " << repetitions << " repetitions, "
      << "optimizer=" << to_string(config.optimizer)
      << " R=" << config.rule_count << " seed=" << base_seed << "\n";
  out << "  accuracy " << mean_accuracy << " +/- " << std_accuracy << " %\n";
  if (mean_auc.has_value()) {
    out << "  auc      " << std::setprecision(4) << *mean_auc << " +/- "
        << *std_auc << "\n" << std::setprecision(2);
  }
  out << "  active features per rule " << mean_active_features
      << " (sparsest rule " << min_rule_active_features << ")\n";
  std::vector<double> secs;
  for (const RepetitionResult& r : runs) secs.push_back(r.seconds);
  out << "  mean train+eval time " << mean_of(secs) << " s per repetition\n";
  return out.str();
}

std::string ExperimentSummary::to_csv() const {
  std::ostringstream out;
  out << "# dataset=" << dataset << " mode=" << mode
      << " optimizer=" << to_string(config.optimizer)
      << " rules=" << config.rule_count << " base_seed=" << base_seed << "\n";
  // No timing columns here: rerunning with the same seed must reproduce
  // this file byte for byte.
  out << "repetition,test_accuracy,test_auc,mean_active_features,final_loss\n";
  for (const RepetitionResult& r : runs) {
    out << r.repetition << ',' << std::setprecision(17) << r.test_accuracy
        << ',';
    if (r.test_auc.has_value()) out << *r.test_auc;
    out << ',' << r.active_features.mean() << ',' << r.final_loss << "\n";
  }
  return out.str();
}

}  // namespace unfis
