#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "unfis/model.hpp"
#include "unfis/optimizer.hpp"

namespace unfis {

struct InitReport {
  Eigen::MatrixXd centroids;        // R x n
  Eigen::MatrixXd width_estimates;  // R x n
  std::vector<int> cluster_sizes;   // R
  int neighbor_count = 0;           // k used for the width estimate

  std::string to_text(const std::vector<std::string>& feature_names = {}) const;
};

struct InitResult {
  ModelParams params;
  InitReport report;
};

// Data-driven starting point:
//   centers      k-means centroids (R clusters, farthest-point seeding,
//                at most 50 Lloyd iterations)
//   widths       per-dimension std over the k nearest samples of each
//                centroid, k = max(5, N/(3R)); floored at 0.1x the global
//                per-dimension std.  R = 1 uses every sample, so the widths
//                equal the global std.
//   gate logits  +2 (gates start mostly open)
//   coefficients 0, except biases = smoothed log class priors
//   thresholds   0
// Throws infeasible_clustering when R > N.
InitResult init_params(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                       const TrainConfig& config);

}  // namespace unfis
