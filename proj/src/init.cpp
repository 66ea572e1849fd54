#include "unfis/init.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "unfis/rng.hpp"

namespace unfis {
namespace {

constexpr int kMaxLloydIterations = 50;
constexpr double kGateStartLogit = 2.0;
constexpr double kWidthFloorFraction = 0.1;

double squared_distance(const Eigen::MatrixXd& X, int row,
                        const Eigen::RowVectorXd& center) {
  return (X.row(row) - center).squaredNorm();
}

// Farthest-point seeding: first centroid from the seeded generator, each
// following one the sample farthest from everything chosen so far.
Eigen::MatrixXd seed_centroids(const Eigen::MatrixXd& X, int k, Rng& rng) {
  const int N = static_cast<int>(X.rows());
  Eigen::MatrixXd centroids(k, X.cols());
  centroids.row(0) = X.row(static_cast<Eigen::Index>(rng.uniform_index(N)));
  Eigen::VectorXd best = Eigen::VectorXd::Constant(N, 1e300);
  for (int c = 1; c < k; ++c) {
    for (int r = 0; r < N; ++r) {
      best[r] = std::min(best[r], squared_distance(X, r, centroids.row(c - 1)));
    }
    Eigen::Index farthest = 0;
    best.maxCoeff(&farthest);
    centroids.row(c) = X.row(farthest);
  }
  return centroids;
}

}  // namespace

std::string InitReport::to_text(
    const std::vector<std::string>& feature_names) const {
  std::ostringstream out;
  out << "k-means initialization: " << centroids.rows() << " clusters, "
      << "width neighborhood k=" << neighbor_count << "\n";
  for (Eigen::Index i = 0; i < centroids.rows(); ++i) {
    out << "  cluster " << (i + 1) << " (size "
        << cluster_sizes[static_cast<std::size_t>(i)] << "):";
    for (Eigen::Index j = 0; j < centroids.cols(); ++j) {
      out << ' ';
      if (static_cast<std::size_t>(j) < feature_names.size()) {
        out << feature_names[static_cast<std::size_t>(j)] << '=';
      }
      out << std::fixed << std::setprecision(3) << centroids(i, j) << "+/-"
          << width_estimates(i, j);
    }
    out << "\n";
  }
  return out.str();
}

InitResult init_params(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                       const TrainConfig& config) {
  config.validate();
  const int N = static_cast<int>(X.rows());
  const int n = static_cast<int>(X.cols());
  const int C = static_cast<int>(Y.cols());
  const int R = config.rule_count;
  if (N < 1 || n < 1 || C < 1) {
    fail(ErrorCategory::shape, "initialization needs non-empty X and Y");
  }
  if (Y.rows() != N) {
    fail(ErrorCategory::shape, "X and Y row counts differ");
  }
  if (R > N) {
    fail(ErrorCategory::infeasible_clustering,
         "requested " + std::to_string(R) + " rules but only " +
             std::to_string(N) + " training samples");
  }

  Rng rng(config.seed);
  Eigen::MatrixXd centroids = seed_centroids(X, R, rng);
  std::vector<int> assignment(static_cast<std::size_t>(N), 0);
  std::vector<int> sizes(static_cast<std::size_t>(R), 0);

  for (int pass = 0; pass < kMaxLloydIterations; ++pass) {
    bool changed = false;
    std::fill(sizes.begin(), sizes.end(), 0);
    for (int r = 0; r < N; ++r) {
      int best_c = 0;
      double best_d = squared_distance(X, r, centroids.row(0));
      for (int c = 1; c < R; ++c) {
        const double d = squared_distance(X, r, centroids.row(c));
        if (d < best_d) {
          best_d = d;
          best_c = c;
        }
      }
      if (assignment[static_cast<std::size_t>(r)] != best_c) {
        assignment[static_cast<std::size_t>(r)] = best_c;
        changed = true;
      }
      ++sizes[static_cast<std::size_t>(best_c)];
    }
    if (!changed && pass > 0) break;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(R, n);
    for (int r = 0; r < N; ++r) {
      sums.row(assignment[static_cast<std::size_t>(r)]) += X.row(r);
    }
    for (int c = 0; c < R; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) {
        centroids.row(c) = sums.row(c) / sizes[static_cast<std::size_t>(c)];
      } else {
        // Re-seed an empty cluster at the sample farthest from its own
        // centroid assignment; deterministic.
        Eigen::Index worst = 0;
        double worst_d = -1.0;
        for (int r = 0; r < N; ++r) {
          const double d = squared_distance(
              X, r, centroids.row(assignment[static_cast<std::size_t>(r)]));
          if (d > worst_d) {
            worst_d = d;
            worst = r;
          }
        }
        centroids.row(c) = X.row(worst);
      }
    }
  }

  // Width estimate: std over the k nearest samples of each centroid.  A
  // single cluster covers the whole set, so R = 1 reduces to the global std.
  int k = std::max(5, N / (3 * R));
  if (R == 1) k = N;
  k = std::min(k, N);

  Eigen::RowVectorXd global_mean = X.colwise().mean();
  Eigen::RowVectorXd global_std(n);
  for (int j = 0; j < n; ++j) {
    const double ss = (X.col(j).array() - global_mean[j]).square().sum();
    global_std[j] = N > 1 ? std::sqrt(ss / (N - 1)) : 0.0;
  }

  Eigen::MatrixXd widths(R, n);
  std::vector<int> order(static_cast<std::size_t>(N));
  for (int c = 0; c < R; ++c) {
    std::iota(order.begin(), order.end(), 0);
    const Eigen::RowVectorXd center = centroids.row(c);
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [&](int a, int b) {
                        const double da = squared_distance(X, a, center);
                        const double db = squared_distance(X, b, center);
                        return da != db ? da < db : a < b;
                      });
    for (int j = 0; j < n; ++j) {
      double mean = 0.0;
      for (int t = 0; t < k; ++t) mean += X(order[static_cast<std::size_t>(t)], j);
      mean /= k;
      double ss = 0.0;
      for (int t = 0; t < k; ++t) {
        const double d = X(order[static_cast<std::size_t>(t)], j) - mean;
        ss += d * d;
      }
      const double sd = k > 1 ? std::sqrt(ss / (k - 1)) : 0.0;
      const double floor_j =
          global_std[j] > 0.0 ? kWidthFloorFraction * global_std[j]
                              : kWidthFloorFraction;
      widths(c, j) = std::max(sd, floor_j);
    }
  }

  ModelParams params = ModelParams::zeros(R, n, C, config.selection_enabled,
                                          config.epsilon);
  params.centers = centroids;
  params.widths = widths;
  params.gate_logits.setConstant(kGateStartLogit);

  // Biases get smoothed log class priors so the initial softmax matches the
  // label distribution.
  Eigen::VectorXd counts = Y.colwise().sum();
  for (int c = 0; c < C; ++c) {
    const double prior = (counts[c] + 1.0) / (static_cast<double>(N) + C);
    for (int i = 0; i < R; ++i) {
      params.coefficients[static_cast<std::size_t>(c)](i, 0) = std::log(prior);
    }
  }

  InitResult result;
  result.report.centroids = centroids;
  result.report.width_estimates = widths;
  result.report.cluster_sizes = sizes;
  result.report.neighbor_count = k;
  result.params = std::move(params);
  return result;
}

}  // namespace unfis
