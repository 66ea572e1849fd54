#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "unfis/eval.hpp"
#include "unfis/rng.hpp"

using namespace unfis;

namespace {

// One rule, one input, two classes, selection off: z_0 = x, z_1 = 0, so the
// argmax prediction is class 0 exactly when x > 0.
ModelParams sign_model() {
  ModelParams params = ModelParams::zeros(1, 1, 2, false);
  params.widths.setConstant(1.0);
  params.coefficients[0](0, 1) = 1.0;  // class 0 slope on x
  return params;
}

// Two clean 1-D blobs around +/-2.
Dataset blob_dataset(int per_class) {
  Rng rng(404);
  const int N = 2 * per_class;
  Dataset data;
  data.name = "blobs";
  data.features.resize(N, 1);
  data.labels = Eigen::MatrixXd::Zero(N, 2);
  for (int k = 0; k < N; ++k) {
    const int cls = k % 2;
    data.features(k, 0) = (cls == 0 ? 2.0 : -2.0) + 0.3 * rng.normal();
    data.labels(k, cls) = 1.0;
    data.label_index.push_back(cls);
  }
  data.feature_names = {"x"};
  data.class_names = {"pos", "neg"};
  data.positive_class = 0;
  return data;
}

}  // namespace

TEST_CASE("confusion counts from argmax predictions") {
  const ModelParams params = sign_model();
  Eigen::MatrixXd X(6, 1);
  X << 1, 2, -1, -2, 1, -1;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(6, 2);
  T(0, 0) = T(1, 0) = T(2, 0) = 1.0;  // first three are true positives
  T(3, 1) = T(4, 1) = T(5, 1) = 1.0;

  const ConfusionCounts c = confusion(params, X, T, 0);
  CHECK(c.tp == 2);
  CHECK(c.fn == 1);
  CHECK(c.tn == 2);
  CHECK(c.fp == 1);
  CHECK(c.total() == 6);
  CHECK(accuracy_from_counts(c) == doctest::Approx(100.0 * 4.0 / 6.0));
  CHECK(auc_from_counts(c) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("accuracy and balanced-accuracy AUC on frozen counts") {
  ConfusionCounts c;
  c.tp = 45;
  c.tn = 45;
  c.fp = 5;
  c.fn = 5;
  CHECK(accuracy_from_counts(c) == doctest::Approx(90.0));
  CHECK(auc_from_counts(c) == doctest::Approx(0.9));

  // sensitivity 0.9, specificity 0.5 -> 0.7
  c.tp = 9;
  c.fn = 1;
  c.tn = 5;
  c.fp = 5;
  CHECK(auc_from_counts(c) == doctest::Approx(0.7));
}

TEST_CASE("auc is undefined when a class is absent") {
  ConfusionCounts c;
  c.tp = 3;
  c.fn = 1;  // no negatives at all
  try {
    auc_from_counts(c);
    FAIL("expected undefined_metric");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::undefined_metric);
  }

  ConfusionCounts empty;
  CHECK_THROWS_AS(accuracy_from_counts(empty), Error);
}

TEST_CASE("rank auc handles separation, ties, and mixtures") {
  Eigen::VectorXd s(4);
  s << 0.9, 0.8, 0.4, 0.2;
  CHECK(rank_auc(s, {1, 1, 0, 0}) == doctest::Approx(1.0));
  CHECK(rank_auc(s, {0, 0, 1, 1}) == doctest::Approx(0.0));

  s << 0.3, 0.7, 0.5, 0.1;
  CHECK(rank_auc(s, {1, 0, 1, 0}) == doctest::Approx(0.5));

  Eigen::VectorXd tied(2);
  tied << 0.5, 0.5;
  CHECK(rank_auc(tied, {1, 0}) == doctest::Approx(0.5));

  CHECK_THROWS_AS(rank_auc(s, {1, 1, 1, 1}), Error);
}

TEST_CASE("sample mean and standard deviation") {
  const std::vector<double> v = {2, 4, 4, 4, 5, 5, 7, 9};
  CHECK(mean_of(v) == doctest::Approx(5.0));
  CHECK(std_of(v) == doctest::Approx(std::sqrt(32.0 / 7.0)).epsilon(1e-12));
  CHECK(std_of({3.25}) == 0.0);
  CHECK_THROWS_AS(mean_of({}), Error);
}

TEST_CASE("run_experiment produces per-repetition results") {
  const Dataset data = blob_dataset(20);
  TrainConfig cfg;
  cfg.optimizer = OptimizerKind::gqlm;
  cfg.rule_count = 2;
  cfg.max_iterations = 15;
  cfg.batch_size = 16;

  const ExperimentSummary summary = run_experiment(data, cfg, 4, 500);
  REQUIRE(summary.runs.size() == 4);
  for (int r = 0; r < 4; ++r) {
    const RepetitionResult& run = summary.runs[static_cast<std::size_t>(r)];
    CHECK(run.repetition == r);
    CHECK(run.test_accuracy >= 0.0);
    CHECK(run.test_accuracy <= 100.0);
    CHECK(run.test_auc.has_value());
    CHECK(run.active_features.size() == 2);
    CHECK(std::isfinite(run.final_loss));
    CHECK(run.seconds >= 0.0);
  }
  // Two clean blobs: near-perfect separation expected.
  CHECK(summary.mean_accuracy >= 90.0);
  CHECK(summary.mean_auc.has_value());
  CHECK(summary.repetitions == 4);
  CHECK(summary.base_seed == 500);
  CHECK(summary.mode == "unfis");
}

TEST_CASE("run_experiment is deterministic and thread-count independent") {
  const Dataset data = blob_dataset(15);
  TrainConfig cfg;
  cfg.optimizer = OptimizerKind::sgd;
  cfg.momentum = 0.0;
  cfg.rule_count = 2;
  cfg.max_iterations = 8;
  cfg.batch_size = 8;

  const ExperimentSummary a = run_experiment(data, cfg, 3, 42, 0.7, false, 1);
  const ExperimentSummary b = run_experiment(data, cfg, 3, 42, 0.7, false, 3);
  CHECK(a.to_csv() == b.to_csv());
  for (std::size_t r = 0; r < 3; ++r) {
    CHECK(a.runs[r].test_accuracy == b.runs[r].test_accuracy);
    CHECK(a.runs[r].final_loss == b.runs[r].final_loss);
  }

  const ExperimentSummary c = run_experiment(data, cfg, 3, 43, 0.7, false, 1);
  bool any_difference = false;
  for (std::size_t r = 0; r < 3; ++r) {
    any_difference =
        any_difference || a.runs[r].final_loss != c.runs[r].final_loss;
  }
  CHECK(any_difference);
}

TEST_CASE("experiment csv carries no timing and has a header") {
  const Dataset data = blob_dataset(10);
  TrainConfig cfg;
  cfg.optimizer = OptimizerKind::sgd;
  cfg.momentum = 0.0;
  cfg.rule_count = 1;
  cfg.max_iterations = 2;

  const ExperimentSummary summary = run_experiment(data, cfg, 2, 7);
  const std::string csv = summary.to_csv();
  CHECK(csv.find("# dataset=blobs mode=unfis") != std::string::npos);
  CHECK(csv.find("repetition,test_accuracy,test_auc,mean_active_features,"
                 "final_loss") != std::string::npos);
  CHECK(csv.find("seconds") == std::string::npos);

  const std::string text = summary.to_text();
  CHECK(text.find("blobs") != std::string::npos);
  CHECK(text.find("accuracy") != std::string::npos);
}

TEST_CASE("experiment errors name the repetition") {
  const Dataset data = blob_dataset(5);  // 10 samples -> 7 train rows
  TrainConfig cfg;
  cfg.rule_count = 8;  // more rules than train rows
  cfg.max_iterations = 1;
  try {
    run_experiment(data, cfg, 2, 11);
    FAIL("expected infeasible_clustering");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::infeasible_clustering);
    CHECK(std::string(e.what()).find("repetition") != std::string::npos);
  }
}
