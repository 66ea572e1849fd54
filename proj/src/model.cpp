#include "unfis/model.hpp"

#include <cmath>
#include <sstream>

#include "unfis/rng.hpp"

namespace unfis {

double logistic_gate(double s) {
  // Split on sign so the exponential never overflows.
  if (s >= 0.0) {
    return 1.0 / (1.0 + std::exp(-s));
  }
  const double e = std::exp(s);
  return e / (1.0 + e);
}

double gaussian_membership(double x, double center, double width) {
  if (!(width > 0.0)) {
    fail(ErrorCategory::invalid_parameter,
         "gaussian width must be positive, got " + std::to_string(width));
  }
  const double d = (x - center) / width;
  return std::exp(-0.5 * d * d);
}

double selected_membership(double membership, double gate, double epsilon) {
  return (membership + epsilon) /
         ((1.0 - gate) * membership + gate + epsilon);
}

double rule_firing(const Eigen::VectorXd& gated_memberships) {
  double f = 1.0;
  for (Eigen::Index j = 0; j < gated_memberships.size(); ++j) {
    f *= gated_memberships[j];
  }
  if (std::isnan(f)) {
    fail(ErrorCategory::degenerate_firing, "rule firing is NaN");
  }
  return std::max(f, kMembershipFloor);
}

Eigen::VectorXd normalize_firings(const Eigen::VectorXd& firings) {
  const double total = firings.sum();
  if (!std::isfinite(total) || total <= 0.0) {
    std::ostringstream msg;
    msg << "sum of rule firings is " << total << " over " << firings.size()
        << " rules";
    fail(ErrorCategory::degenerate_firing, msg.str());
  }
  return firings / total;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double peak = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - peak).exp();
  return e / e.sum();
}

ModelParams ModelParams::zeros(int rules, int inputs, int classes,
                               bool selection, double epsilon) {
  if (rules < 1 || inputs < 1 || classes < 1) {
    fail(ErrorCategory::invalid_parameter,
         "model dimensions must be at least 1 (R=" + std::to_string(rules) +
             ", n=" + std::to_string(inputs) +
             ", C=" + std::to_string(classes) + ")");
  }
  ModelParams p;
  p.rule_count = rules;
  p.input_count = inputs;
  p.class_count = classes;
  p.selection_enabled = selection;
  p.epsilon = epsilon;
  p.centers = Eigen::MatrixXd::Zero(rules, inputs);
  p.widths = Eigen::MatrixXd::Ones(rules, inputs);
  p.gate_logits = Eigen::MatrixXd::Zero(rules, inputs);
  p.coefficients.assign(static_cast<std::size_t>(classes),
                        Eigen::MatrixXd::Zero(rules, inputs + 1));
  p.thresholds = Eigen::VectorXd::Zero(classes);
  return p;
}

ModelParams ModelParams::random(int rules, int inputs, int classes,
                                std::uint64_t seed, bool selection,
                                double epsilon) {
  ModelParams p = zeros(rules, inputs, classes, selection, epsilon);
  Rng rng(seed);
  for (Eigen::Index i = 0; i < rules; ++i) {
    for (Eigen::Index j = 0; j < inputs; ++j) {
      p.centers(i, j) = rng.uniform(-1.0, 1.0);
      p.widths(i, j) = rng.uniform(0.3, 1.5);
      p.gate_logits(i, j) = rng.uniform(-2.0, 2.0);
    }
  }
  for (auto& block : p.coefficients) {
    for (Eigen::Index i = 0; i < block.rows(); ++i) {
      for (Eigen::Index j = 0; j < block.cols(); ++j) {
        block(i, j) = rng.uniform(-0.5, 0.5);
      }
    }
  }
  for (Eigen::Index c = 0; c < classes; ++c) {
    p.thresholds[c] = rng.uniform(-0.5, 0.5);
  }
  return p;
}

Eigen::MatrixXd ModelParams::gates() const {
  if (!selection_enabled) {
    return Eigen::MatrixXd::Ones(rule_count, input_count);
  }
  return gate_logits.unaryExpr([](double s) { return logistic_gate(s); });
}

Eigen::VectorXd ModelParams::active_feature_counts() const {
  return gates().rowwise().sum();
}

Eigen::VectorXd ModelParams::pack() const {
  validate();
  const ParamLayout lay = layout();
  Eigen::VectorXd out(lay.size());
  for (int i = 0; i < rule_count; ++i) {
    for (int j = 0; j < input_count; ++j) {
      out[lay.center_index(i, j)] = centers(i, j);
      out[lay.width_index(i, j)] = widths(i, j);
      if (selection_enabled) out[lay.gate_index(i, j)] = gate_logits(i, j);
    }
  }
  for (int c = 0; c < class_count; ++c) {
    const Eigen::MatrixXd& block = coefficients[static_cast<std::size_t>(c)];
    for (int i = 0; i < rule_count; ++i) {
      for (int j = 0; j <= input_count; ++j) {
        out[lay.coeff_index(c, i, j)] = block(i, j);
      }
    }
  }
  for (int c = 0; c < class_count; ++c) {
    out[lay.threshold_index(c)] = thresholds[c];
  }
  return out;
}

void ModelParams::set_packed(const Eigen::VectorXd& packed) {
  const ParamLayout lay = layout();
  if (packed.size() != lay.size()) {
    fail(ErrorCategory::shape,
         "packed vector has " + std::to_string(packed.size()) +
             " entries, layout expects " + std::to_string(lay.size()));
  }
  for (int i = 0; i < rule_count; ++i) {
    for (int j = 0; j < input_count; ++j) {
      centers(i, j) = packed[lay.center_index(i, j)];
      widths(i, j) = packed[lay.width_index(i, j)];
      if (selection_enabled) gate_logits(i, j) = packed[lay.gate_index(i, j)];
    }
  }
  for (int c = 0; c < class_count; ++c) {
    Eigen::MatrixXd& block = coefficients[static_cast<std::size_t>(c)];
    for (int i = 0; i < rule_count; ++i) {
      for (int j = 0; j <= input_count; ++j) {
        block(i, j) = packed[lay.coeff_index(c, i, j)];
      }
    }
  }
  for (int c = 0; c < class_count; ++c) {
    thresholds[c] = packed[lay.threshold_index(c)];
  }
}

ModelParams ModelParams::unpack(const Eigen::VectorXd& packed, int rules,
                                int inputs, int classes, bool selection,
                                double epsilon) {
  ModelParams p = zeros(rules, inputs, classes, selection, epsilon);
  p.set_packed(packed);
  return p;
}

void ModelParams::validate() const {
  if (rule_count < 1 || input_count < 1 || class_count < 1) {
    fail(ErrorCategory::invalid_parameter, "model dimensions must be >= 1");
  }
  auto expect_shape = [&](const Eigen::MatrixXd& m, int r, int c,
                          const char* name) {
    if (m.rows() != r || m.cols() != c) {
      std::ostringstream msg;
      msg << name << " is " << m.rows() << "x" << m.cols() << ", expected "
          << r << "x" << c;
      fail(ErrorCategory::shape, msg.str());
    }
  };
  expect_shape(centers, rule_count, input_count, "centers");
  expect_shape(widths, rule_count, input_count, "widths");
  expect_shape(gate_logits, rule_count, input_count, "gate_logits");
  if (static_cast<int>(coefficients.size()) != class_count) {
    fail(ErrorCategory::shape, "coefficient blocks != class count");
  }
  for (const auto& block : coefficients) {
    expect_shape(block, rule_count, input_count + 1, "coefficients");
  }
  if (thresholds.size() != class_count) {
    fail(ErrorCategory::shape, "thresholds size != class count");
  }
  if (!(widths.array() > 0.0).all()) {
    fail(ErrorCategory::invalid_parameter, "all widths must be positive");
  }
  if (!(epsilon >= 0.0)) {
    fail(ErrorCategory::invalid_parameter, "epsilon must be non-negative");
  }
}

void rule_consequents(const ModelParams& params, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& phi, Eigen::MatrixXd& local,
                      Eigen::MatrixXd& weighted) {
  const int R = params.rule_count;
  const int n = params.input_count;
  const int C = params.class_count;
  const Eigen::MatrixXd g = params.gates();
  local.resize(C, R);
  weighted.resize(C, R);
  for (int c = 0; c < C; ++c) {
    const Eigen::MatrixXd& a = params.coefficients[static_cast<std::size_t>(c)];
    for (int i = 0; i < R; ++i) {
      double y = a(i, 0);  // bias, not gated
      for (int j = 0; j < n; ++j) {
        y += g(i, j) * a(i, j + 1) * x[j];
      }
      local(c, i) = y;
      weighted(c, i) = phi[i] * y;
    }
  }
}

Eigen::VectorXd class_probabilities(const Eigen::MatrixXd& weighted_outputs,
                                    const Eigen::VectorXd& thresholds) {
  if (weighted_outputs.rows() != thresholds.size()) {
    fail(ErrorCategory::shape,
         "weighted outputs rows != threshold count");
  }
  const Eigen::VectorXd z =
      weighted_outputs.rowwise().sum() - thresholds;
  return softmax(z);
}

ForwardTrace forward(const ModelParams& params, const Eigen::VectorXd& x) {
  params.validate();
  if (x.size() != params.input_count) {
    fail(ErrorCategory::shape,
         "input has " + std::to_string(x.size()) + " entries, model expects " +
             std::to_string(params.input_count));
  }
  const int R = params.rule_count;
  const int n = params.input_count;

  ForwardTrace t;
  t.input = x;
  t.gates = params.gates();
  t.memberships.resize(R, n);
  t.gated.resize(R, n);
  t.firings.resize(R);
  for (int i = 0; i < R; ++i) {
    for (int j = 0; j < n; ++j) {
      const double mu =
          gaussian_membership(x[j], params.centers(i, j), params.widths(i, j));
      t.memberships(i, j) = mu;
      const double plus =
          selected_membership(mu, t.gates(i, j), params.epsilon);
      t.gated(i, j) = std::max(plus, kMembershipFloor);
    }
    t.firings[i] = rule_firing(t.gated.row(i).transpose());
  }
  t.normalized = normalize_firings(t.firings);
  rule_consequents(params, x, t.normalized, t.local_outputs,
                   t.weighted_outputs);
  t.logits = t.weighted_outputs.rowwise().sum() - params.thresholds;
  t.probabilities = softmax(t.logits);
  return t;
}

Eigen::MatrixXd predict_probabilities(const ModelParams& params,
                                      const Eigen::MatrixXd& X) {
  Eigen::MatrixXd out(X.rows(), params.class_count);
  for (Eigen::Index k = 0; k < X.rows(); ++k) {
    out.row(k) = forward(params, X.row(k).transpose()).probabilities;
  }
  return out;
}

}  // namespace unfis
