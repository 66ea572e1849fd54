#include <doctest.h>

#include <cmath>

#include "unfis/model.hpp"
#include "unfis/rng.hpp"

using namespace unfis;

TEST_CASE("logistic gate values") {
  CHECK(logistic_gate(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(logistic_gate(10.0) ==
        doctest::Approx(0.9999546021312976).epsilon(1e-14));
  CHECK(logistic_gate(-3.0) ==
        doctest::Approx(0.04742587317756678).epsilon(1e-14));
  // No overflow at extreme logits.
  CHECK(logistic_gate(800.0) == 1.0);
  CHECK(logistic_gate(-800.0) >= 0.0);
  CHECK(std::isfinite(logistic_gate(-800.0)));
  // Strictly increasing.
  double prev = -1.0;
  for (double s = -30.0; s <= 30.0; s += 0.5) {
    const double g = logistic_gate(s);
    CHECK(g > prev);
    prev = g;
  }
}

TEST_CASE("gaussian membership") {
  CHECK(gaussian_membership(1.7, 1.7, 0.4) == 1.0);
  CHECK(gaussian_membership(2.5, 2.0, 0.5) ==
        doctest::Approx(0.6065306597126334).epsilon(1e-14));  // x = m + sigma
  CHECK(gaussian_membership(1.0, 2.0, 0.5) ==
        doctest::Approx(0.1353352832366127).epsilon(1e-14));  // x = m + 2 sigma
  CHECK_THROWS_AS(gaussian_membership(0.0, 0.0, 0.0), Error);
  CHECK_THROWS_AS(gaussian_membership(0.0, 0.0, -1.0), Error);
  try {
    gaussian_membership(0.0, 0.0, 0.0);
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::invalid_parameter);
  }
}

TEST_CASE("selected membership endpoints and interior point") {
  // Gate fully closed: every membership maps to 1 exactly.
  CHECK(selected_membership(0.1, 0.0, 0.0) == 1.0);
  CHECK(selected_membership(0.9, 0.0, 1e-12) == 1.0);
  // Gate fully open recovers mu (up to epsilon).
  CHECK(selected_membership(0.37, 1.0, 0.0) == doctest::Approx(0.37).epsilon(1e-15));
  CHECK(selected_membership(0.37, 1.0, 1e-12) ==
        doctest::Approx(0.37).epsilon(1e-9));
  // Interior: mu = 0.5, gate = 0.5 -> 2/3.
  CHECK(selected_membership(0.5, 0.5, 0.0) ==
        doctest::Approx(0.6666666666666666).epsilon(1e-15));
}

TEST_CASE("selected membership lemma properties over random draws") {
  Rng rng(2024);
  const double eps = 1e-12;
  for (int t = 0; t < 2000; ++t) {
    const double mu = rng.uniform();
    const double gate = rng.uniform();
    const double plus = selected_membership(mu, gate, eps);
    CHECK(plus > 0.0);
    CHECK(plus <= 1.0 + eps);
    // mu = 1 maps to exactly 1 for any gate.
    CHECK(selected_membership(1.0, gate, 0.0) == 1.0);
    // Strict monotonicity in mu.
    const double bigger = selected_membership(std::min(mu + 0.01, 1.0), gate, eps);
    if (mu + 0.01 <= 1.0) CHECK(bigger > plus);
  }
}

TEST_CASE("rule firing product and floor") {
  Eigen::VectorXd g(3);
  g << 0.9, 0.8, 0.5;
  CHECK(rule_firing(g) == doctest::Approx(0.36).epsilon(1e-15));

  // Product of two floored-but-tiny factors underflows; the firing floor
  // keeps it positive.
  Eigen::VectorXd tiny(2);
  tiny << 1e-200, 1e-200;
  CHECK(rule_firing(tiny) == kMembershipFloor);

  Eigen::VectorXd bad(2);
  bad << 0.5, std::nan("");
  CHECK_THROWS_AS(rule_firing(bad), Error);
}

TEST_CASE("normalized firings sum to one") {
  Eigen::VectorXd f(2);
  f << 1.0, 3.0;
  const Eigen::VectorXd phi = normalize_firings(f);
  CHECK(phi[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(phi[1] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(phi.sum() == doctest::Approx(1.0).epsilon(1e-12));

  Eigen::VectorXd zeros = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(normalize_firings(zeros), Error);
  try {
    normalize_firings(zeros);
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::degenerate_firing);
  }
}

TEST_CASE("softmax is stable and shift invariant") {
  Eigen::VectorXd z(2);
  z << std::log(2.0), 0.0;
  const Eigen::VectorXd p = softmax(z);
  CHECK(p[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(p[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  const Eigen::VectorXd shifted = softmax(z.array() + 1234.5);
  CHECK((p - shifted).cwiseAbs().maxCoeff() < 1e-12);

  Eigen::VectorXd big(3);
  big << 1000.0, 0.0, -1000.0;
  const Eigen::VectorXd pb = softmax(big);
  CHECK(pb.allFinite());
  CHECK(pb.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pb[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rule consequents: bias ungated, slopes gated") {
  // R=1, n=1, C=1; alpha = [1, 2], s = 0 so the gate is 0.5; x = 3, phi = 0.4.
  ModelParams p = ModelParams::zeros(1, 1, 1);
  p.coefficients[0] << 1.0, 2.0;
  p.gate_logits(0, 0) = 0.0;
  Eigen::VectorXd x(1);
  x << 3.0;
  Eigen::VectorXd phi(1);
  phi << 0.4;
  Eigen::MatrixXd local, weighted;
  rule_consequents(p, x, phi, local, weighted);
  CHECK(local(0, 0) == doctest::Approx(4.0).epsilon(1e-15));     // 1 + 0.5*2*3
  CHECK(weighted(0, 0) == doctest::Approx(1.6).epsilon(1e-15));  // 0.4 * 4
}

TEST_CASE("packed vector layout and lengths") {
  CHECK(ModelParams::zeros(2, 4, 3).parameter_count() == 57);
  CHECK(ModelParams::zeros(1, 1, 1).parameter_count() == 6);
  CHECK(ModelParams::zeros(3, 2, 5).parameter_count() == 68);
  CHECK(ModelParams::zeros(2, 4, 3, false).parameter_count() == 49);
  CHECK(ModelParams::zeros(3, 2, 5, false).parameter_count() == 62);

  // Block order: centers, widths, gates, coefficients, thresholds.
  ModelParams p = ModelParams::zeros(2, 2, 2);
  p.centers << 1, 2, 3, 4;
  p.widths << 5, 6, 7, 8;
  p.gate_logits << 9, 10, 11, 12;
  p.coefficients[0] << 13, 14, 15, 16, 17, 18;  // class 0: rules x (bias, a1, a2)
  p.coefficients[1] << 19, 20, 21, 22, 23, 24;
  p.thresholds << 25, 26;
  const Eigen::VectorXd v = p.pack();
  CHECK(v[0] == 1);
  CHECK(v[3] == 4);
  CHECK(v[4] == 5);
  CHECK(v[8] == 9);
  // Coefficients are rule-major, then class-major, then coefficient index.
  CHECK(v[12] == 13);  // rule 0, class 0, bias
  CHECK(v[15] == 19);  // rule 0, class 1, bias
  CHECK(v[18] == 16);  // rule 1, class 0, bias
  CHECK(v[24] == 25);  // threshold 0
  CHECK(v[25] == 26);

  const ModelParams q = ModelParams::unpack(v, 2, 2, 2);
  CHECK((q.centers.array() == p.centers.array()).all());
  CHECK((q.widths.array() == p.widths.array()).all());
  CHECK((q.gate_logits.array() == p.gate_logits.array()).all());
  CHECK((q.coefficients[0].array() == p.coefficients[0].array()).all());
  CHECK((q.coefficients[1].array() == p.coefficients[1].array()).all());
  CHECK((q.thresholds.array() == p.thresholds.array()).all());

  // Random round trip, both modes.
  for (bool selection : {true, false}) {
    const ModelParams r = ModelParams::random(3, 4, 2, 99, selection);
    const ModelParams rt = ModelParams::unpack(r.pack(), 3, 4, 2, selection);
    CHECK((rt.pack().array() == r.pack().array()).all());
  }

  Eigen::VectorXd wrong(10);
  wrong.setZero();
  ModelParams t = ModelParams::zeros(2, 2, 2);
  CHECK_THROWS_AS(t.set_packed(wrong), Error);
}

TEST_CASE("forward pass matches an independent hand-rolled evaluation") {
  const ModelParams p = ModelParams::random(2, 3, 2, 42);
  Eigen::VectorXd x(3);
  x << 0.3, -1.1, 0.7;
  const ForwardTrace t = forward(p, x);

  // Reference computed with plain scalar code, no shared helpers.
  double f[2];
  double y[2][2];
  for (int i = 0; i < 2; ++i) {
    f[i] = 1.0;
    for (int j = 0; j < 3; ++j) {
      const double d = x[j] - p.centers(i, j);
      const double mu = std::exp(-d * d / (2.0 * p.widths(i, j) * p.widths(i, j)));
      const double g = 1.0 / (1.0 + std::exp(-p.gate_logits(i, j)));
      const double plus =
          (mu + p.epsilon) / ((1.0 - g) * mu + g + p.epsilon);
      f[i] *= plus;
    }
  }
  const double total = f[0] + f[1];
  double z[2];
  for (int c = 0; c < 2; ++c) {
    z[c] = -p.thresholds[c];
    for (int i = 0; i < 2; ++i) {
      double yl = p.coefficients[c](i, 0);
      for (int j = 0; j < 3; ++j) {
        const double g = 1.0 / (1.0 + std::exp(-p.gate_logits(i, j)));
        yl += g * p.coefficients[c](i, j + 1) * x[j];
      }
      y[c][i] = yl;
      z[c] += (f[i] / total) * yl;
    }
  }
  const double m = std::max(z[0], z[1]);
  const double e0 = std::exp(z[0] - m), e1 = std::exp(z[1] - m);

  CHECK(t.probabilities[0] == doctest::Approx(e0 / (e0 + e1)).epsilon(1e-12));
  CHECK(t.probabilities[1] == doctest::Approx(e1 / (e0 + e1)).epsilon(1e-12));
  CHECK(t.probabilities.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t.normalized.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t.local_outputs(0, 1) == doctest::Approx(y[0][1]).epsilon(1e-12));
}

TEST_CASE("forward input validation") {
  const ModelParams p = ModelParams::random(2, 3, 2, 7);
  Eigen::VectorXd wrong(2);
  wrong.setZero();
  CHECK_THROWS_AS(forward(p, wrong), Error);

  Eigen::VectorXd with_nan(3);
  with_nan << 0.0, std::nan(""), 0.0;
  CHECK_THROWS_AS(forward(p, with_nan), Error);
}

TEST_CASE("gate-free mode pins gates to one") {
  ModelParams p = ModelParams::random(2, 3, 2, 5, false);
  CHECK((p.gates().array() == 1.0).all());
  CHECK(p.active_feature_counts()[0] == doctest::Approx(3.0).epsilon(1e-15));

  // Saturated gates approximate the gate-free network.
  ModelParams saturated = p;
  saturated.selection_enabled = true;
  saturated.gate_logits.setConstant(500.0);
  Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    Eigen::VectorXd x(3);
    for (int j = 0; j < 3; ++j) x[j] = rng.uniform(-2.0, 2.0);
    const Eigen::VectorXd a = forward(p, x).probabilities;
    const Eigen::VectorXd b = forward(saturated, x).probabilities;
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("active feature counts are gate row sums") {
  ModelParams p = ModelParams::zeros(2, 4, 2);
  p.gate_logits.setZero();  // every gate 0.5
  const Eigen::VectorXd counts = p.active_feature_counts();
  CHECK(counts[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(counts[1] == doctest::Approx(2.0).epsilon(1e-12));
}
