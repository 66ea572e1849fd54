#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "unfis/errors.hpp"

namespace unfis {

inline constexpr double kDefaultEpsilon = 1e-12;

// Floor applied to gated memberships and to rule firings.  A product of n
// tiny factors can underflow to exactly zero even when each factor is
// floored, so the firing itself is floored too; only NaN firings are
// treated as degenerate.
inline constexpr double kMembershipFloor = 1e-300;

// sigma(s) = 1 / (1 + e^-s), the soft feature-selection gate.
double logistic_gate(double s);

// exp(-(x - m)^2 / (2 sigma^2)); sigma must be > 0.
double gaussian_membership(double x, double center, double width);

// Gated membership mu+ = (mu + eps) / ((1 - g) mu + g + eps).
// g -> 1 recovers mu, g -> 0 pushes mu+ to 1 (feature ignored).
double selected_membership(double membership, double gate, double epsilon);

// Product of gated memberships for one rule, floored at kMembershipFloor.
double rule_firing(const Eigen::VectorXd& gated_memberships);

// phi_i = f_i / sum(f).  Throws degenerate_firing when the sum is not
// finite and positive.
Eigen::VectorXd normalize_firings(const Eigen::VectorXd& firings);

// Numerically stable softmax (max-subtracted).
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

// Offsets into the flat parameter vector.  Order: centers, widths, gate
// logits (skipped when gates are disabled), consequent coefficients
// (rule-major, then class, then coefficient 0..n), thresholds.
struct ParamLayout {
  int rules = 0;
  int inputs = 0;
  int classes = 0;
  bool with_gates = true;

  int center_block() const { return 0; }
  int width_block() const { return rules * inputs; }
  int gate_block() const { return 2 * rules * inputs; }
  int coeff_block() const { return (with_gates ? 3 : 2) * rules * inputs; }
  int threshold_block() const {
    return coeff_block() + rules * classes * (inputs + 1);
  }
  int size() const { return threshold_block() + classes; }

  int center_index(int rule, int input) const {
    return center_block() + rule * inputs + input;
  }
  int width_index(int rule, int input) const {
    return width_block() + rule * inputs + input;
  }
  int gate_index(int rule, int input) const {
    return gate_block() + rule * inputs + input;
  }
  // coeff 0 is the bias; coeff j in 1..n multiplies x_j.
  int coeff_index(int cls, int rule, int coeff) const {
    return coeff_block() + (rule * classes + cls) * (inputs + 1) + coeff;
  }
  int threshold_index(int cls) const { return threshold_block() + cls; }
};

struct ModelParams {
  int rule_count = 0;
  int input_count = 0;
  int class_count = 0;
  bool selection_enabled = true;  // false = plain fuzzy network, gates pinned to 1
  double epsilon = kDefaultEpsilon;

  Eigen::MatrixXd centers;      // R x n
  Eigen::MatrixXd widths;       // R x n, strictly positive
  Eigen::MatrixXd gate_logits;  // R x n (present but unused when selection off)
  std::vector<Eigen::MatrixXd> coefficients;  // one R x (n+1) block per class
  Eigen::VectorXd thresholds;   // C

  static ModelParams zeros(int rules, int inputs, int classes,
                           bool selection = true,
                           double epsilon = kDefaultEpsilon);
  static ModelParams random(int rules, int inputs, int classes,
                            std::uint64_t seed, bool selection = true,
                            double epsilon = kDefaultEpsilon);

  ParamLayout layout() const {
    return ParamLayout{rule_count, input_count, class_count, selection_enabled};
  }
  int parameter_count() const { return layout().size(); }

  // Gate values sigma(s), or a matrix of ones when selection is disabled.
  Eigen::MatrixXd gates() const;

  // Sum of gate values per rule ("active" feature count, Eq-style n_af).
  Eigen::VectorXd active_feature_counts() const;

  Eigen::VectorXd pack() const;
  void set_packed(const Eigen::VectorXd& packed);
  static ModelParams unpack(const Eigen::VectorXd& packed, int rules,
                            int inputs, int classes, bool selection = true,
                            double epsilon = kDefaultEpsilon);

  void validate() const;  // shapes + positive widths + finite entries
};

// Everything the backward pass needs from one forward evaluation.
struct ForwardTrace {
  Eigen::VectorXd input;            // n
  Eigen::MatrixXd memberships;      // R x n   mu
  Eigen::MatrixXd gates;            // R x n   sigma(s)
  Eigen::MatrixXd gated;            // R x n   mu+ (floored)
  Eigen::VectorXd firings;          // R       f (floored)
  Eigen::VectorXd normalized;       // R       phi
  Eigen::MatrixXd local_outputs;    // C x R   y_ci
  Eigen::MatrixXd weighted_outputs; // C x R   Y_ci = phi_i * y_ci
  Eigen::VectorXd logits;           // C       z_c
  Eigen::VectorXd probabilities;    // C       softmax(z)
};

// Local TSK outputs y_ci = a_ci0 + sum_j gate_ij * a_cij * x_j and their
// firing-weighted versions.  The bias term is never gated.
void rule_consequents(const ModelParams& params, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& phi, Eigen::MatrixXd& local,
                      Eigen::MatrixXd& weighted);

// p = softmax(rowsum(weighted) - thresholds).
Eigen::VectorXd class_probabilities(const Eigen::MatrixXd& weighted_outputs,
                                    const Eigen::VectorXd& thresholds);

ForwardTrace forward(const ModelParams& params, const Eigen::VectorXd& x);

// Convenience: probabilities for a batch (N x n -> N x C).
Eigen::MatrixXd predict_probabilities(const ModelParams& params,
                                      const Eigen::MatrixXd& X);

}  // namespace unfis
