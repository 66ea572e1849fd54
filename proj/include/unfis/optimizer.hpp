#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "unfis/jacobian.hpp"
#include "unfis/model.hpp"

namespace unfis {

enum class OptimizerKind { gqlm, lm, sgd, momentum };

OptimizerKind optimizer_from_string(std::string_view name);
const char* to_string(OptimizerKind kind);

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::gqlm;
  int rule_count = 2;          // R
  int batch_size = 32;         // M
  int max_iterations = 100;    // passes over the training set
  double damping = 1e3;        // lambda
  double step_scale = 1e-3;    // eta (divides the solved step)
  double momentum = 0.9;       // beta
  double epsilon = 1e-12;      // gate regularizer in mu+
  bool selection_enabled = true;  // false = plain fuzzy net, gates pinned to 1
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainHistory {
  std::string optimizer;
  std::vector<double> loss;           // per iteration, summed cross-entropy
  std::vector<double> train_accuracy; // percent
  std::vector<double> test_accuracy;  // percent; NaN when no test split given
  std::vector<double> seconds;        // cumulative wall time

  std::string to_csv() const;
};

struct TrainResult {
  ModelParams params;
  TrainHistory history;
};

// One GqLM update:  solve (sum_c J_c^T J_c + C*lambda*I) d = sum_c J_c^T
// diag(1/p-hat_c) P*_c, then scale by 1/eta.  The right-hand side equals
// minus the cross-entropy gradient.
Eigen::VectorXd gqlm_delta(const JacobianBatch& batch, double damping,
                           double step_scale);

// Classic Levenberg-Marquardt on the residuals P* - p-hat:  solve
// (sum_c J_c^T J_c + lambda*I) d = sum_c J_c^T r_c, scaled by 1/eta so the
// step size is comparable with gqlm_delta.
Eigen::VectorXd lm_delta(const JacobianBatch& batch, double damping,
                         double step_scale);

// Plain gradient step (eta * negative gradient), shared by sgd/momentum.
Eigen::VectorXd gradient_delta(const JacobianBatch& batch, double step_scale);

// Summed cross-entropy -sum_k log p-hat[k, true_k], with the probability
// floored at 1e-300 before the log.
double cross_entropy(const ModelParams& params, const Eigen::MatrixXd& X,
                     const Eigen::MatrixXd& targets);

double accuracy_percent(const ModelParams& params, const Eigen::MatrixXd& X,
                        const Eigen::MatrixXd& targets);

// Mini-batch training driver shared by all four optimizers.  Batches are
// drawn from a fresh shuffle each iteration; the trailing batch keeps its
// natural (smaller) size.  The update is filtered through momentum:
// d* <- beta d* + (1-beta) d  (beta = 0 for sgd), then pi <- pi + d*.
TrainResult train(const Eigen::MatrixXd& train_x,
                  const Eigen::MatrixXd& train_y, const TrainConfig& config,
                  const ModelParams& initial,
                  const Eigen::MatrixXd* test_x = nullptr,
                  const Eigen::MatrixXd* test_y = nullptr);

}  // namespace unfis
