#include "unfis/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "unfis/rng.hpp"

namespace unfis {
namespace {

// Accumulate A = sum_c J_c^T J_c and b = sum_c J_c^T w_c with caller-chosen
// per-class weight vectors.
Eigen::MatrixXd normal_matrix(const JacobianBatch& batch) {
  const int P = batch.parameter_count();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(P, P);
  for (const Eigen::MatrixXd& J : batch.per_class) {
    A.noalias() += J.transpose() * J;
  }
  return A;
}

Eigen::VectorXd solve_damped(Eigen::MatrixXd A, const Eigen::VectorXd& b,
                             double added_diagonal) {
  A.diagonal().array() += added_diagonal;

  // The accumulated matrix must be symmetric up to roundoff before the
  // LDLT factorization is trusted.
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  const double asymmetry = (A - A.transpose()).cwiseAbs().maxCoeff();
  if (asymmetry > 1e-10 * scale) {
    std::ostringstream msg;
    msg << "normal matrix asymmetry " << asymmetry << " exceeds tolerance";
    fail(ErrorCategory::solver, msg.str());
  }
  A = ((A + A.transpose()) / 2.0).eval();

  Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  if (ldlt.info() != Eigen::Success) {
    fail(ErrorCategory::solver, "LDLT factorization failed");
  }
  Eigen::VectorXd d = ldlt.solve(b);
  if (!d.allFinite()) {
    fail(ErrorCategory::solver, "linear solve produced non-finite step");
  }
  return d;
}

}  // namespace

OptimizerKind optimizer_from_string(std::string_view name) {
  if (name == "gqlm") return OptimizerKind::gqlm;
  if (name == "lm") return OptimizerKind::lm;
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "momentum") return OptimizerKind::momentum;
  fail(ErrorCategory::invalid_parameter,
       "unknown optimizer '" + std::string(name) +
           "' (expected gqlm, lm, sgd or momentum)");
}

const char* to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::gqlm: return "gqlm";
    case OptimizerKind::lm: return "lm";
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::momentum: return "momentum";
  }
  return "unknown";
}

void TrainConfig::validate() const {
  if (rule_count < 1) {
    fail(ErrorCategory::invalid_parameter, "rule count must be >= 1");
  }
  if (batch_size < 1) {
    fail(ErrorCategory::invalid_parameter, "batch size must be >= 1");
  }
  if (max_iterations < 0) {
    fail(ErrorCategory::invalid_parameter, "iteration count must be >= 0");
  }
  if (!(damping >= 0.0)) {
    fail(ErrorCategory::invalid_parameter, "damping must be >= 0");
  }
  if (!(step_scale > 0.0)) {
    fail(ErrorCategory::invalid_parameter, "step scale must be > 0");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    fail(ErrorCategory::invalid_parameter, "momentum must be in [0, 1)");
  }
  if (!(epsilon >= 0.0)) {
    fail(ErrorCategory::invalid_parameter, "epsilon must be >= 0");
  }
}

std::string TrainHistory::to_csv() const {
  std::ostringstream out;
  out << "# optimizer=" << optimizer << "\n";
  out << "iteration,loss,train_accuracy,test_accuracy,seconds\n";
  for (std::size_t i = 0; i < loss.size(); ++i) {
    out << (i + 1) << ',' << std::setprecision(17) << loss[i] << ','
        << train_accuracy[i] << ',' << test_accuracy[i] << ',' << seconds[i]
        << "\n";
  }
  return out.str();
}

Eigen::VectorXd gqlm_delta(const JacobianBatch& batch, double damping,
                           double step_scale) {
  if (!(step_scale > 0.0)) {
    fail(ErrorCategory::invalid_parameter, "step scale must be > 0");
  }
  Eigen::MatrixXd A = normal_matrix(batch);
  // Minus the cross-entropy gradient.
  const Eigen::VectorXd b = -cross_entropy_gradient(batch);
  // The damping term sits inside the per-class sum, so it appears C times.
  const double added = damping * static_cast<double>(batch.class_count());
  return solve_damped(std::move(A), b, added) / step_scale;
}

Eigen::VectorXd lm_delta(const JacobianBatch& batch, double damping,
                         double step_scale) {
  if (!(step_scale > 0.0)) {
    fail(ErrorCategory::invalid_parameter, "step scale must be > 0");
  }
  Eigen::MatrixXd A = normal_matrix(batch);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(batch.parameter_count());
  for (int c = 0; c < batch.class_count(); ++c) {
    const Eigen::VectorXd residual =
        batch.targets.col(c) - batch.probabilities.col(c);
    b.noalias() +=
        batch.per_class[static_cast<std::size_t>(c)].transpose() * residual;
  }
  return solve_damped(std::move(A), b, damping) / step_scale;
}

Eigen::VectorXd gradient_delta(const JacobianBatch& batch, double step_scale) {
  if (!(step_scale > 0.0)) {
    fail(ErrorCategory::invalid_parameter, "step scale must be > 0");
  }
  return -step_scale * cross_entropy_gradient(batch);
}

double cross_entropy(const ModelParams& params, const Eigen::MatrixXd& X,
                     const Eigen::MatrixXd& targets) {
  if (X.rows() != targets.rows()) {
    fail(ErrorCategory::shape, "sample count differs between X and targets");
  }
  double loss = 0.0;
  for (Eigen::Index k = 0; k < X.rows(); ++k) {
    const Eigen::VectorXd p = forward(params, X.row(k).transpose()).probabilities;
    Eigen::Index truth = 0;
    targets.row(k).maxCoeff(&truth);
    loss -= std::log(std::max(p[truth], 1e-300));
  }
  return loss;
}

double accuracy_percent(const ModelParams& params, const Eigen::MatrixXd& X,
                        const Eigen::MatrixXd& targets) {
  if (X.rows() == 0) {
    fail(ErrorCategory::empty_evaluation, "accuracy over an empty set");
  }
  long correct = 0;
  for (Eigen::Index k = 0; k < X.rows(); ++k) {
    const Eigen::VectorXd p = forward(params, X.row(k).transpose()).probabilities;
    Eigen::Index predicted = 0, truth = 0;
    p.maxCoeff(&predicted);
    targets.row(k).maxCoeff(&truth);
    if (predicted == truth) ++correct;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(X.rows());
}

TrainResult train(const Eigen::MatrixXd& train_x,
                  const Eigen::MatrixXd& train_y, const TrainConfig& config,
                  const ModelParams& initial,
                  const Eigen::MatrixXd* test_x,
                  const Eigen::MatrixXd* test_y) {
  config.validate();
  initial.validate();
  if (train_x.rows() != train_y.rows()) {
    fail(ErrorCategory::shape, "train_x and train_y row counts differ");
  }
  if (train_x.rows() == 0) {
    fail(ErrorCategory::empty_evaluation, "training set is empty");
  }
  if (train_x.cols() != initial.input_count) {
    fail(ErrorCategory::shape, "train_x columns != model input count");
  }
  if (initial.selection_enabled != config.selection_enabled) {
    fail(ErrorCategory::invalid_parameter,
         "selection flag differs between config and initial parameters");
  }
  if ((test_x == nullptr) != (test_y == nullptr)) {
    fail(ErrorCategory::invalid_parameter,
         "test inputs and targets must be given together");
  }

  const int N = static_cast<int>(train_x.rows());
  ModelParams params = initial;
  Eigen::VectorXd pi = params.pack();
  Eigen::VectorXd filtered = Eigen::VectorXd::Zero(pi.size());
  Rng rng(config.seed);

  TrainResult result;
  result.history.optimizer = to_string(config.optimizer);
  const auto t0 = std::chrono::steady_clock::now();

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    const std::vector<int> order = rng.permutation(N);
    for (int start = 0; start < N; start += config.batch_size) {
      const int count = std::min(config.batch_size, N - start);
      Eigen::MatrixXd bx(count, train_x.cols());
      Eigen::MatrixXd by(count, train_y.cols());
      for (int r = 0; r < count; ++r) {
        bx.row(r) = train_x.row(order[static_cast<std::size_t>(start + r)]);
        by.row(r) = train_y.row(order[static_cast<std::size_t>(start + r)]);
      }
      const JacobianBatch batch = build_jacobian_batch(params, bx, by);

      Eigen::VectorXd delta;
      double beta = config.momentum;
      switch (config.optimizer) {
        case OptimizerKind::gqlm:
          delta = gqlm_delta(batch, config.damping, config.step_scale);
          break;
        case OptimizerKind::lm:
          delta = lm_delta(batch, config.damping, config.step_scale);
          break;
        case OptimizerKind::sgd:
          delta = gradient_delta(batch, config.step_scale);
          beta = 0.0;
          break;
        case OptimizerKind::momentum:
          delta = gradient_delta(batch, config.step_scale);
          break;
      }
      filtered = beta * filtered + (1.0 - beta) * delta;
      pi += filtered;
      if (!pi.allFinite()) {
        fail(ErrorCategory::divergence,
             "parameters became non-finite at iteration " +
                 std::to_string(iter + 1));
      }
      // Widths only enter the model squared, so a step that flips a width's
      // sign lands on the identical membership function; reflect it back to
      // keep the sigma > 0 invariant, with a floor against collapse to 0.
      {
        const ParamLayout lay = params.layout();
        const int base = lay.width_block();
        for (int q = 0; q < initial.rule_count * initial.input_count; ++q) {
          pi[base + q] = std::max(std::abs(pi[base + q]), 1e-6);
        }
      }
      params.set_packed(pi);
    }

    const double loss = cross_entropy(params, train_x, train_y);
    if (!std::isfinite(loss)) {
      fail(ErrorCategory::divergence,
           "loss became non-finite at iteration " + std::to_string(iter + 1));
    }
    result.history.loss.push_back(loss);
    result.history.train_accuracy.push_back(
        accuracy_percent(params, train_x, train_y));
    result.history.test_accuracy.push_back(
        test_x != nullptr ? accuracy_percent(params, *test_x, *test_y)
                          : std::nan(""));
    result.history.seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count());
  }

  result.params = std::move(params);
  return result;
}

}  // namespace unfis
