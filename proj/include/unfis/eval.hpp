#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "unfis/data.hpp"
#include "unfis/init.hpp"
#include "unfis/model.hpp"
#include "unfis/optimizer.hpp"

namespace unfis {

struct ConfusionCounts {
  long tp = 0, tn = 0, fp = 0, fn = 0;
  long total() const { return tp + tn + fp + fn; }
};

// Argmax predictions against a designated positive class.
ConfusionCounts confusion(const ModelParams& params, const Eigen::MatrixXd& X,
                          const Eigen::MatrixXd& targets, int positive_class);

double accuracy_from_counts(const ConfusionCounts& c);  // percent

// Balanced accuracy form of AUC for thresholded predictions:
// 0.5 * (TP/(TP+FN) + TN/(TN+FP)).  Undefined (throws) when either class
// is absent from the evaluation set.
double auc_from_counts(const ConfusionCounts& c);

// Mann-Whitney / rank AUC over continuous scores; diagnostic alternative.
double rank_auc(const Eigen::VectorXd& scores,
                const std::vector<int>& is_positive);

struct RepetitionResult {
  int repetition = 0;
  double test_accuracy = 0.0;
  std::optional<double> test_auc;       // binary datasets only
  Eigen::VectorXd active_features;      // per rule, at the final iteration
  double final_loss = 0.0;
  double seconds = 0.0;
};

struct ExperimentSummary {
  std::string dataset;
  std::string mode;  // "unfis" or "fnn"
  TrainConfig config;
  std::uint64_t base_seed = 0;
  int repetitions = 0;
  std::vector<RepetitionResult> runs;

  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  std::optional<double> mean_auc;
  std::optional<double> std_auc;
  double mean_active_features = 0.0;  // averaged over rules and repetitions
  double min_rule_active_features = 0.0;  // mean over reps of each run's sparsest rule

  std::string to_text() const;
  std::string to_csv() const;  // one row per repetition
};

// Repeats split -> normalize -> init -> train -> evaluate `repetitions`
// times.  Repetition r derives every seed from base_seed + r, so two calls
// with the same base seed see identical splits (paired comparisons).
// Repetitions run on a small thread pool; results land in indexed slots so
// the output does not depend on scheduling.
ExperimentSummary run_experiment(const Dataset& data, const TrainConfig& config,
                                 int repetitions, std::uint64_t base_seed,
                                 double train_fraction = 0.7,
                                 bool stratified = false, int max_threads = 0);

// Sample mean / std (N-1 denominator; std = 0 for a single value).
double mean_of(const std::vector<double>& values);
double std_of(const std::vector<double>& values);

}  // namespace unfis
