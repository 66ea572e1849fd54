#include "unfis/jacobian.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace unfis {
namespace {

// Logit gradient rows G (C x P): d z_c / d pi for one sample.  The softmax
// chain rule is applied afterwards.
Eigen::MatrixXd logit_gradients(const ModelParams& params,
                                const ForwardTrace& t) {
  const int R = params.rule_count;
  const int n = params.input_count;
  const int C = params.class_count;
  const ParamLayout lay = params.layout();
  const Eigen::VectorXd& x = t.input;

  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(C, lay.size());

  // Row sums of the weighted outputs: ybar_g = sum_i Y_gi = z_g + theta_g.
  const Eigen::VectorXd ybar = t.weighted_outputs.rowwise().sum();

  const double total_firing = t.firings.sum();

  // Leave-one-out products of gated memberships per rule, via prefix and
  // suffix arrays.  Dividing f_i by mu+_ij would be 0/0 when a factor
  // underflows; this form never divides.
  Eigen::MatrixXd loo(R, n);
  for (int i = 0; i < R; ++i) {
    Eigen::VectorXd prefix(n + 1), suffix(n + 1);
    prefix[0] = 1.0;
    for (int j = 0; j < n; ++j) prefix[j + 1] = prefix[j] * t.gated(i, j);
    suffix[n] = 1.0;
    for (int j = n - 1; j >= 0; --j) suffix[j] = suffix[j + 1] * t.gated(i, j);
    for (int j = 0; j < n; ++j) loo(i, j) = prefix[j] * suffix[j + 1];
  }

  for (int i = 0; i < R; ++i) {
    const double phi = t.normalized[i];
    for (int j = 0; j < n; ++j) {
      const double mu = t.memberships(i, j);
      const double gate = t.gates(i, j);
      const double xm = x[j] - params.centers(i, j);
      const double sg = params.widths(i, j);
      const double denom = (1.0 - gate) * mu + gate;  // >= gate > 0
      const double denom2 = denom * denom;

      // Common factor d z / d mu+ shared by the center/width/gate paths:
      // (y_gi - ybar_g) * phi_i / mu+_ij, with phi_i / mu+_ij expressed as
      // loo_ij / total_firing.
      const double w = loo(i, j) / total_firing;

      const double dplus_dmu = gate / denom2;
      const double dplus_dgate = -mu * (1.0 - mu) / denom2;
      const double dmu_dm = mu * xm / (sg * sg);
      const double dmu_dsigma = mu * xm * xm / (sg * sg * sg);
      const double dgate_ds = gate * (1.0 - gate);

      const double center_factor = w * dplus_dmu * dmu_dm;
      const double width_factor = w * dplus_dmu * dmu_dsigma;
      const double gate_factor = w * dplus_dgate;

      for (int c = 0; c < C; ++c) {
        const double dy = t.local_outputs(c, i) - ybar[c];
        G(c, lay.center_index(i, j)) = dy * center_factor;
        G(c, lay.width_index(i, j)) = dy * width_factor;
        if (params.selection_enabled) {
          // The gate logit also feeds the consequent through sigma * a * x.
          const double a =
              params.coefficients[static_cast<std::size_t>(c)](i, j + 1);
          G(c, lay.gate_index(i, j)) =
              (dy * gate_factor + phi * a * x[j]) * dgate_ds;
        }
      }
    }
    for (int c = 0; c < C; ++c) {
      G(c, lay.coeff_index(c, i, 0)) = phi;  // bias
      for (int j = 0; j < n; ++j) {
        G(c, lay.coeff_index(c, i, j + 1)) = phi * t.gates(i, j) * x[j];
      }
    }
  }
  for (int c = 0; c < C; ++c) {
    G(c, lay.threshold_index(c)) = -1.0;
  }
  return G;
}

struct BlockRange {
  const char* name;
  int begin;
  int end;
};

std::vector<BlockRange> block_ranges(const ParamLayout& lay) {
  std::vector<BlockRange> blocks;
  blocks.push_back({"centers", lay.center_block(), lay.width_block()});
  blocks.push_back({"widths", lay.width_block(),
                    lay.with_gates ? lay.gate_block() : lay.coeff_block()});
  if (lay.with_gates) {
    blocks.push_back({"gates", lay.gate_block(), lay.coeff_block()});
  }
  blocks.push_back({"coefficients", lay.coeff_block(), lay.threshold_block()});
  blocks.push_back({"thresholds", lay.threshold_block(), lay.size()});
  return blocks;
}

}  // namespace

Eigen::MatrixXd jacobian_rows(const ModelParams& params,
                              const ForwardTrace& trace) {
  const Eigen::MatrixXd G = logit_gradients(params, trace);
  const Eigen::VectorXd& p = trace.probabilities;

  // Softmax chain rule: J_c = p_c * (G_c - sum_g p_g G_g).
  const Eigen::RowVectorXd mean_row = p.transpose() * G;
  Eigen::MatrixXd J(G.rows(), G.cols());
  for (Eigen::Index c = 0; c < G.rows(); ++c) {
    J.row(c) = p[c] * (G.row(c) - mean_row);
  }

  if (!J.allFinite()) {
    for (const BlockRange& b : block_ranges(params.layout())) {
      if (!J.middleCols(b.begin, b.end - b.begin).allFinite()) {
        fail(ErrorCategory::gradient_overflow,
             std::string("non-finite jacobian entries in block '") + b.name +
                 "'");
      }
    }
    fail(ErrorCategory::gradient_overflow, "non-finite jacobian entries");
  }
  return J;
}

Eigen::MatrixXd finite_difference_jacobian(const ModelParams& params,
                                           const Eigen::VectorXd& x,
                                           double step) {
  if (!(step > 0.0)) {
    fail(ErrorCategory::invalid_parameter, "finite-difference step must be > 0");
  }
  const Eigen::VectorXd base = params.pack();
  const int P = static_cast<int>(base.size());
  Eigen::MatrixXd J(params.class_count, P);
  ModelParams work = params;
  Eigen::VectorXd probe = base;
  for (int q = 0; q < P; ++q) {
    probe[q] = base[q] + step;
    work.set_packed(probe);
    const Eigen::VectorXd plus = forward(work, x).probabilities;
    probe[q] = base[q] - step;
    work.set_packed(probe);
    const Eigen::VectorXd minus = forward(work, x).probabilities;
    probe[q] = base[q];
    J.col(q) = (plus - minus) / (2.0 * step);
  }
  return J;
}

JacobianBatch build_jacobian_batch(const ModelParams& params,
                                   const Eigen::MatrixXd& X,
                                   const Eigen::MatrixXd& targets) {
  if (X.rows() != targets.rows()) {
    fail(ErrorCategory::shape, "sample count differs between X and targets");
  }
  if (targets.cols() != params.class_count) {
    fail(ErrorCategory::shape, "target columns != class count");
  }
  const int N = static_cast<int>(X.rows());
  const int C = params.class_count;
  JacobianBatch batch;
  batch.per_class.assign(static_cast<std::size_t>(C),
                         Eigen::MatrixXd(N, params.parameter_count()));
  batch.probabilities.resize(N, C);
  batch.inverse_probs.resize(N, C);
  batch.targets = targets;
  for (int k = 0; k < N; ++k) {
    const ForwardTrace t = forward(params, X.row(k).transpose());
    const Eigen::MatrixXd J = jacobian_rows(params, t);
    for (int c = 0; c < C; ++c) {
      batch.per_class[static_cast<std::size_t>(c)].row(k) = J.row(c);
      batch.probabilities(k, c) = t.probabilities[c];
      batch.inverse_probs(k, c) =
          std::min(1.0 / t.probabilities[c], kInverseProbClamp);
    }
  }
  return batch;
}

Eigen::VectorXd cross_entropy_gradient(const JacobianBatch& batch) {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(batch.parameter_count());
  for (int c = 0; c < batch.class_count(); ++c) {
    const Eigen::VectorXd weighted =
        batch.inverse_probs.col(c).cwiseProduct(batch.targets.col(c));
    grad -= batch.per_class[static_cast<std::size_t>(c)].transpose() * weighted;
  }
  return grad;
}

std::string GradientCheckReport::to_text() const {
  std::ostringstream out;
  out << "gradient check: step=" << step << " tolerance=" << tolerance
      << " samples=" << samples << "\n";
  out << std::left << std::setw(14) << "block" << std::setw(14) << "max-abs"
      << std::setw(14) << "max-rel" << "status\n";
  for (const BlockCheck& b : blocks) {
    out << std::left << std::setw(14) << b.block << std::setw(14)
        << std::scientific << std::setprecision(3) << b.max_abs_error
        << std::setw(14) << b.max_rel_error
        << (b.pass ? "ok" : "FAIL") << "\n";
  }
  out << (pass ? "PASS" : "FAIL") << "\n";
  return out.str();
}

std::string GradientCheckReport::to_csv() const {
  std::ostringstream out;
  out << "block,max_abs_error,max_rel_error,pass\n";
  for (const BlockCheck& b : blocks) {
    out << b.block << ',' << std::scientific << std::setprecision(10)
        << b.max_abs_error << ',' << b.max_rel_error << ','
        << (b.pass ? 1 : 0) << "\n";
  }
  return out.str();
}

GradientCheckReport gradient_check(const ModelParams& params,
                                   const Eigen::MatrixXd& samples,
                                   double step, double tolerance) {
  if (samples.rows() < 1) {
    fail(ErrorCategory::empty_evaluation, "gradient check needs >= 1 sample");
  }
  if (samples.cols() != params.input_count) {
    fail(ErrorCategory::shape, "sample columns != model input count");
  }
  const auto blocks = block_ranges(params.layout());
  std::vector<double> max_abs(blocks.size(), 0.0);
  std::vector<double> max_mag(blocks.size(), 0.0);

  for (Eigen::Index k = 0; k < samples.rows(); ++k) {
    const Eigen::VectorXd x = samples.row(k).transpose();
    const Eigen::MatrixXd analytic = jacobian_rows(params, forward(params, x));
    const Eigen::MatrixXd numeric = finite_difference_jacobian(params, x, step);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const int width = blocks[b].end - blocks[b].begin;
      const auto a = analytic.middleCols(blocks[b].begin, width);
      const auto f = numeric.middleCols(blocks[b].begin, width);
      max_abs[b] = std::max(max_abs[b], (a - f).cwiseAbs().maxCoeff());
      max_mag[b] = std::max({max_mag[b], a.cwiseAbs().maxCoeff(),
                             f.cwiseAbs().maxCoeff()});
    }
  }

  GradientCheckReport report;
  report.step = step;
  report.tolerance = tolerance;
  report.samples = static_cast<int>(samples.rows());
  report.pass = true;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    BlockCheck check;
    check.block = blocks[b].name;
    check.max_abs_error = max_abs[b];
    // Scale by the block's largest entry so roundoff noise on near-zero
    // gradients does not read as a large relative error.
    check.max_rel_error = max_abs[b] / std::max(max_mag[b], 1e-8);
    check.pass = check.max_rel_error <= tolerance;
    report.pass = report.pass && check.pass;
    report.blocks.push_back(std::move(check));
  }
  return report;
}

}  // namespace unfis
