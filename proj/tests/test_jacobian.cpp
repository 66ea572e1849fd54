#include <doctest.h>

#include <cmath>

#include "unfis/jacobian.hpp"
#include "unfis/rng.hpp"

using namespace unfis;

TEST_CASE("threshold columns of the jacobian at a symmetric model") {
  // All-zero parameters, any input: y = 0 for both classes, p = [0.5, 0.5].
  // dp_c/dtheta_g = -S_cg with S = diag(p) - p p^T, so the diagonal is
  // -0.25 and the off-diagonal +0.25.
  const ModelParams p = ModelParams::zeros(1, 1, 2);
  Eigen::VectorXd x(1);
  x << 0.4;
  const ForwardTrace t = forward(p, x);
  CHECK(t.probabilities[0] == doctest::Approx(0.5).epsilon(1e-15));
  const Eigen::MatrixXd J = jacobian_rows(p, t);
  const ParamLayout lay = p.layout();
  CHECK(J(0, lay.threshold_index(0)) == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(J(0, lay.threshold_index(1)) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(J(1, lay.threshold_index(0)) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(J(1, lay.threshold_index(1)) == doctest::Approx(-0.25).epsilon(1e-12));
}

TEST_CASE("jacobian rows sum to zero over classes") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const ModelParams p = ModelParams::random(3, 4, 3, seed);
    Rng rng(seed + 100);
    Eigen::VectorXd x(4);
    for (int j = 0; j < 4; ++j) x[j] = rng.uniform(-2.0, 2.0);
    const Eigen::MatrixXd J = jacobian_rows(p, forward(p, x));
    const Eigen::RowVectorXd sums = J.colwise().sum();
    CHECK(sums.cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("center gradient vanishes at x = m") {
  ModelParams p = ModelParams::random(1, 2, 2, 9);
  Eigen::VectorXd x = p.centers.row(0).transpose();  // sit on the center
  const Eigen::MatrixXd J = jacobian_rows(p, forward(p, x));
  const ParamLayout lay = p.layout();
  CHECK(std::abs(J(0, lay.center_index(0, 0))) < 1e-14);
  CHECK(std::abs(J(1, lay.center_index(0, 1))) < 1e-14);
}

TEST_CASE("gate saturation kills the gate gradient") {
  ModelParams p = ModelParams::random(1, 2, 2, 12);
  p.gate_logits.setConstant(40.0);  // sigma(40): 1 - 4e-18
  Rng rng(5);
  Eigen::VectorXd x(2);
  x << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0);
  const Eigen::MatrixXd J = jacobian_rows(p, forward(p, x));
  const ParamLayout lay = p.layout();
  CHECK(std::abs(J(0, lay.gate_index(0, 0))) < 1e-12);
  CHECK(std::abs(J(0, lay.gate_index(0, 1))) < 1e-12);
}

TEST_CASE("analytic jacobian agrees with central differences") {
  // Small seeded sweep here; the full 100-model sweep is an acceptance
  // criterion.
  for (std::uint64_t seed : {7u, 8u}) {
    for (bool selection : {true, false}) {
      const ModelParams p = ModelParams::random(2, 2, 2, seed, selection);
      Rng rng(seed * 13 + 1);
      Eigen::MatrixXd X(3, 2);
      for (int k = 0; k < 3; ++k) {
        for (int j = 0; j < 2; ++j) X(k, j) = rng.uniform(-2.0, 2.0);
      }
      const GradientCheckReport report = gradient_check(p, X, 1e-6, 1e-4);
      CHECK(report.pass);
      CHECK(report.blocks.size() == (selection ? 5 : 4));
      for (const BlockCheck& b : report.blocks) {
        CHECK(b.max_rel_error < 1e-4);
      }
    }
  }
}

TEST_CASE("gradient check report formats") {
  const ModelParams p = ModelParams::random(1, 1, 2, 3);
  Eigen::MatrixXd X(1, 1);
  X << 0.2;
  const GradientCheckReport r = gradient_check(p, X);
  const std::string text = r.to_text();
  CHECK(text.find("centers") != std::string::npos);
  CHECK(text.find("thresholds") != std::string::npos);
  CHECK(text.find("PASS") != std::string::npos);
  const std::string csv = r.to_csv();
  CHECK(csv.find("block,max_abs_error,max_rel_error,pass") == 0);
}

TEST_CASE("jacobian batch shapes and inverse-probability clamp") {
  ModelParams p = ModelParams::zeros(1, 1, 2);
  // Push class 1 to probability ~0 through its threshold.
  p.thresholds << 0.0, 800.0;
  Eigen::MatrixXd X(2, 1);
  X << 0.1, -0.3;
  Eigen::MatrixXd T(2, 2);
  T << 1, 0, 0, 1;
  const JacobianBatch batch = build_jacobian_batch(p, X, T);
  CHECK(batch.batch_size() == 2);
  CHECK(batch.class_count() == 2);
  CHECK(batch.parameter_count() == p.parameter_count());
  CHECK(batch.per_class.size() == 2);
  CHECK(batch.per_class[0].rows() == 2);
  // p-hat for class 1 underflows (Eigen's exp saturates near 1e-309 rather
  // than flushing to zero); 1/p-hat is clamped either way.
  CHECK(batch.probabilities(0, 1) < 1e-300);
  CHECK(batch.inverse_probs(0, 1) == kInverseProbClamp);
  CHECK(batch.inverse_probs(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cross-entropy gradient matches finite differences of the loss") {
  const ModelParams p = ModelParams::random(1, 2, 2, 21);
  Rng rng(77);
  Eigen::MatrixXd X(4, 2);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(4, 2);
  for (int k = 0; k < 4; ++k) {
    X(k, 0) = rng.uniform(-1.5, 1.5);
    X(k, 1) = rng.uniform(-1.5, 1.5);
    T(k, k % 2) = 1.0;
  }
  const JacobianBatch batch = build_jacobian_batch(p, X, T);
  const Eigen::VectorXd grad = cross_entropy_gradient(batch);

  auto loss_at = [&](const Eigen::VectorXd& packed) {
    ModelParams w = p;
    w.set_packed(packed);
    double loss = 0.0;
    for (int k = 0; k < 4; ++k) {
      const Eigen::VectorXd prob =
          forward(w, X.row(k).transpose()).probabilities;
      Eigen::Index truth = 0;
      T.row(k).maxCoeff(&truth);
      loss -= std::log(prob[truth]);
    }
    return loss;
  };

  const Eigen::VectorXd base = p.pack();
  const double h = 1e-6;
  for (int q = 0; q < base.size(); q += 3) {  // sample a third of the params
    Eigen::VectorXd probe = base;
    probe[q] = base[q] + h;
    const double up = loss_at(probe);
    probe[q] = base[q] - h;
    const double down = loss_at(probe);
    const double fd = (up - down) / (2.0 * h);
    CHECK(grad[q] == doctest::Approx(fd).epsilon(5e-4));
  }
}

TEST_CASE("finite difference step must be positive") {
  const ModelParams p = ModelParams::random(1, 1, 2, 2);
  Eigen::VectorXd x(1);
  x << 0.0;
  CHECK_THROWS_AS(finite_difference_jacobian(p, x, 0.0), Error);
}
