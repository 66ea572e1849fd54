#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "unfis/model.hpp"

namespace unfis {

// Inverse probabilities are clamped at this value so a single confident
// mistake cannot blow up the normal equations.
inline constexpr double kInverseProbClamp = 1e12;

// d p_c / d pi for a single sample: one row per class, one column per
// packed parameter.  Rows sum to zero (softmax invariant).
Eigen::MatrixXd jacobian_rows(const ModelParams& params,
                              const ForwardTrace& trace);

// Central-difference approximation of the same matrix; the oracle the
// analytic version is tested against.
Eigen::MatrixXd finite_difference_jacobian(const ModelParams& params,
                                           const Eigen::VectorXd& x,
                                           double step = 1e-6);

// Per-class Jacobians plus the pieces the optimizers need, for one batch.
struct JacobianBatch {
  std::vector<Eigen::MatrixXd> per_class;  // C matrices, each N x P
  Eigen::MatrixXd probabilities;           // N x C  model outputs p-hat
  Eigen::MatrixXd inverse_probs;           // N x C  1/p-hat, clamped
  Eigen::MatrixXd targets;                 // N x C  one-hot P*

  int batch_size() const { return static_cast<int>(targets.rows()); }
  int class_count() const { return static_cast<int>(targets.cols()); }
  int parameter_count() const {
    return per_class.empty() ? 0 : static_cast<int>(per_class.front().cols());
  }
};

JacobianBatch build_jacobian_batch(const ModelParams& params,
                                   const Eigen::MatrixXd& X,
                                   const Eigen::MatrixXd& targets);

// Gradient of the summed cross-entropy over the batch w.r.t. the packed
// parameters:  -sum_c J_c^T (inverse_probs_c .* targets_c).
Eigen::VectorXd cross_entropy_gradient(const JacobianBatch& batch);

struct BlockCheck {
  std::string block;      // "centers", "widths", "gates", "coefficients", "thresholds"
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;  // relative to the block's largest FD magnitude
  bool pass = false;
};

struct GradientCheckReport {
  double step = 0.0;
  double tolerance = 0.0;
  int samples = 0;
  std::vector<BlockCheck> blocks;
  bool pass = false;

  std::string to_text() const;
  std::string to_csv() const;
};

// Compares analytic vs finite-difference Jacobians over a set of inputs,
// reporting the worst error per parameter block.
GradientCheckReport gradient_check(const ModelParams& params,
                                   const Eigen::MatrixXd& samples,
                                   double step = 1e-6,
                                   double tolerance = 1e-4);

}  // namespace unfis
