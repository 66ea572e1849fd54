#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>

#include "unfis/data.hpp"
#include "unfis/serialize.hpp"

using namespace unfis;

namespace {

// Writes content to a throwaway path and returns it.
std::string temp_file(const std::string& stem, const std::string& content) {
  const std::string path = "/tmp/unfis_" + stem;
  write_text_file(path, content);
  return path;
}

const char* kToyCsv =
    "sepal,petal,species\n"
    "5.1,1.4,setosa\n"
    "4.9,1.3,setosa\n"
    "6.3,4.7,versicolor\n"
    "6.4,4.5,versicolor\n"
    "5.8,5.1,virginica\n";

const char* kToySchema = R"({
  "name": "toy",
  "label_column": "species",
  "classes": ["setosa", "versicolor", "virginica"],
  "features": [{"column": "sepal"}, {"column": "petal"}]
})";

}  // namespace

TEST_CASE("csv parsing handles quotes, padding, and CRLF") {
  const std::string path = temp_file(
      "quotes.csv",
      "a,b,c\r\n"
      "1, \"two, three\" ,3\r\n"
      "\"he said \"\"hi\"\"\",5,6\n"
      "\n"
      "7,8,9\n");
  const RawTable t = load_csv(path);
  REQUIRE(t.columns.size() == 3);
  CHECK(t.columns[2] == "c");
  REQUIRE(t.rows.size() == 3);  // blank line skipped
  CHECK(t.rows[0][1] == "two, three");
  CHECK(t.rows[1][0] == "he said \"hi\"");
  CHECK(t.rows[2][2] == "9");
}

TEST_CASE("csv errors carry coordinates") {
  const std::string path =
      temp_file("ragged.csv", "a,b\n1,2\n1,2,3\n");
  try {
    load_csv(path);
    FAIL("expected ingestion error");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::ingestion);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  CHECK_THROWS_AS(load_csv("/tmp/unfis_no_such_file.csv"), Error);

  const std::string empty = temp_file("empty.csv", "");
  try {
    load_csv(empty);
    FAIL("expected ingestion error");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::ingestion);
  }
}

TEST_CASE("schema loads and validates") {
  const std::string path = temp_file("toy_schema.json", kToySchema);
  const DatasetSchema schema = DatasetSchema::load(path);
  CHECK(schema.name == "toy");
  CHECK(schema.label_column == "species");
  CHECK(schema.class_names.size() == 3);
  CHECK(schema.features[1].column == "petal");
  CHECK(schema.positive_class_index() == -1);

  const std::string bad = temp_file(
      "bad_schema.json",
      R"({"name": "x", "label_column": "y", "classes": ["only"],
          "features": [{"column": "f"}]})");
  try {
    DatasetSchema::load(bad);
    FAIL("expected ingestion error");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::ingestion);
  }

  const std::string wrong_pos = temp_file(
      "bad_pos.json",
      R"({"name": "x", "label_column": "y", "classes": ["a", "b"],
          "positive_class": "c", "features": [{"column": "f"}]})");
  CHECK_THROWS_AS(DatasetSchema::load(wrong_pos), Error);
}

TEST_CASE("dataset assembly: one-hot labels in declared order") {
  const std::string csv = temp_file("toy.csv", kToyCsv);
  const std::string sj = temp_file("toy_schema.json", kToySchema);
  const Dataset data = load_dataset(csv, DatasetSchema::load(sj));

  CHECK(data.sample_count() == 5);
  CHECK(data.feature_count() == 2);
  CHECK(data.class_count() == 3);
  CHECK(data.features(0, 0) == 5.1);
  CHECK(data.features(4, 1) == 5.1);
  CHECK(data.labels(0, 0) == 1.0);
  CHECK(data.labels(2, 1) == 1.0);
  CHECK(data.labels(4, 2) == 1.0);
  CHECK(data.label_index == std::vector<int>{0, 0, 1, 1, 2});
  CHECK(data.labels.rowwise().sum().minCoeff() == 1.0);
  CHECK(data.dropped_rows == 0);
  CHECK(data.positive_class == -1);
}

TEST_CASE("label aliases, categoricals, and positive class") {
  const std::string csv = temp_file(
      "alias.csv",
      "f1,color,target\n"
      "0.5,red,1\n"
      "0.7,blue,2\n"
      "0.1,green,1\n");
  const std::string sj = temp_file("alias_schema.json", R"({
    "name": "alias",
    "label_column": "target",
    "classes": ["yes", "no"],
    "label_aliases": {"1": "yes", "2": "no"},
    "positive_class": "yes",
    "features": [
      {"column": "f1"},
      {"column": "color", "categories": ["red", "green", "blue"]}
    ]
  })");
  const Dataset data = load_dataset(csv, DatasetSchema::load(sj));
  CHECK(data.positive_class == 0);
  CHECK(data.features(0, 1) == 0.0);
  CHECK(data.features(1, 1) == 2.0);
  CHECK(data.features(2, 1) == 1.0);
  CHECK(data.label_index == std::vector<int>{0, 1, 0});
}

TEST_CASE("missing cells drop the row; bad cells raise") {
  const std::string sj = temp_file("toy_schema.json", kToySchema);
  const DatasetSchema schema = DatasetSchema::load(sj);

  const std::string with_missing = temp_file(
      "missing.csv",
      "sepal,petal,species\n"
      "5.1,1.4,setosa\n"
      "?,1.3,setosa\n"
      "6.3,NA,versicolor\n"
      "6.4,4.5,versicolor\n");
  const Dataset data = load_dataset(with_missing, schema);
  CHECK(data.sample_count() == 2);
  CHECK(data.dropped_rows == 2);

  const std::string bad_label = temp_file(
      "badlabel.csv",
      "sepal,petal,species\n"
      "5.1,1.4,setosa\n"
      "5.0,1.2,daffodil\n");
  try {
    load_dataset(bad_label, schema);
    FAIL("expected ingestion error");
  } catch (const Error& e) {
    const std::string what = e.what();
    CHECK(what.find("row 3") != std::string::npos);
    CHECK(what.find("daffodil") != std::string::npos);
  }

  const std::string bad_number = temp_file(
      "badnum.csv",
      "sepal,petal,species\n"
      "5.1,oops,setosa\n");
  try {
    load_dataset(bad_number, schema);
    FAIL("expected ingestion error");
  } catch (const Error& e) {
    const std::string what = e.what();
    CHECK(what.find("petal") != std::string::npos);
    CHECK(what.find("oops") != std::string::npos);
  }

  const std::string missing_col = temp_file(
      "nocol.csv", "sepal,species\n5.1,setosa\n");
  CHECK_THROWS_AS(load_dataset(missing_col, schema), Error);
}

TEST_CASE("expected_rows guards against truncated downloads") {
  const std::string csv = temp_file("toy.csv", kToyCsv);
  const std::string sj = temp_file("rows_schema.json", R"({
    "name": "toy",
    "label_column": "species",
    "classes": ["setosa", "versicolor", "virginica"],
    "features": [{"column": "sepal"}, {"column": "petal"}],
    "expected_rows": 150
  })");
  try {
    load_dataset(csv, DatasetSchema::load(sj));
    FAIL("expected ingestion error");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::ingestion);
    CHECK(std::string(e.what()).find("150") != std::string::npos);
  }
}

TEST_CASE("split sizes use floor with an epsilon guard") {
  std::vector<int> labels(150, 0);
  SplitSpec spec;
  spec.train_fraction = 0.7;
  spec.seed = 9;

  SplitIndices s = split(150, labels, spec);
  CHECK(s.train.size() == 105);
  CHECK(s.test.size() == 45);

  // 0.7 * 90 is 62.999... in binary floating point; the guard keeps it 63.
  labels.assign(90, 0);
  s = split(90, labels, spec);
  CHECK(s.train.size() == 63);
  CHECK(s.test.size() == 27);

  labels.assign(10, 0);
  s = split(10, labels, spec);
  CHECK(s.train.size() == 7);
  CHECK(s.test.size() == 3);

  // Extreme fractions clamp to keep both sides non-empty.
  spec.train_fraction = 0.01;
  s = split(10, labels, spec);
  CHECK(s.train.size() == 1);
  spec.train_fraction = 0.999;
  s = split(10, labels, spec);
  CHECK(s.test.size() == 1);

  spec.train_fraction = 1.0;
  CHECK_THROWS_AS(split(10, labels, spec), Error);
  spec.train_fraction = 0.7;
  CHECK_THROWS_AS(split(1, labels, spec), Error);
}

TEST_CASE("split is a partition, reproducible, repetition-sensitive") {
  std::vector<int> labels(40, 0);
  SplitSpec spec;
  spec.train_fraction = 0.7;
  spec.seed = 123;
  spec.repetition = 4;

  const SplitIndices a = split(40, labels, spec);
  const SplitIndices b = split(40, labels, spec);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);

  std::set<int> seen(a.train.begin(), a.train.end());
  seen.insert(a.test.begin(), a.test.end());
  CHECK(seen.size() == 40);
  CHECK(*seen.begin() == 0);
  CHECK(*seen.rbegin() == 39);

  spec.repetition = 5;
  const SplitIndices c = split(40, labels, spec);
  CHECK(a.train != c.train);

  // seed+repetition folding: (seed=123, rep=5) == (seed=128, rep=0)
  SplitSpec folded;
  folded.train_fraction = 0.7;
  folded.seed = 128;
  folded.repetition = 0;
  const SplitIndices d = split(40, labels, folded);
  CHECK(c.train == d.train);
}

TEST_CASE("stratified split keeps class balance") {
  // 30 of class 0, 10 of class 1.
  std::vector<int> labels(40, 0);
  for (int i = 30; i < 40; ++i) labels[static_cast<std::size_t>(i)] = 1;
  SplitSpec spec;
  spec.train_fraction = 0.7;
  spec.seed = 77;
  spec.stratified = true;

  const SplitIndices s = split(40, labels, spec);
  CHECK(s.train.size() == 28);
  int train_pos = 0;
  for (int idx : s.train) train_pos += labels[static_cast<std::size_t>(idx)];
  CHECK(train_pos == 7);  // floor(0.7 * 10)
}

TEST_CASE("normalization statistics come from the given matrix") {
  Eigen::MatrixXd X(4, 2);
  X << 1, 5,
       3, 5,
       5, 5,
       7, 5;
  const NormalizationStats stats = fit_normalization(X);
  CHECK(stats.mean[0] == doctest::Approx(4.0));
  CHECK(stats.mean[1] == doctest::Approx(5.0));
  // Sample std (N-1): sqrt((9+1+1+9)/3)
  CHECK(stats.std[0] == doctest::Approx(std::sqrt(20.0 / 3.0)).epsilon(1e-12));
  CHECK(stats.std[1] == 1.0);  // zero spread stored as one

  const Eigen::MatrixXd Z = stats.apply(X);
  CHECK(Z.col(0).mean() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(Z.col(1).cwiseAbs().maxCoeff() == 0.0);

  Eigen::VectorXd x(2);
  x << 6.0, 5.0;
  const Eigen::VectorXd z = stats.apply(x);
  const Eigen::VectorXd back = stats.invert(z);
  CHECK(back[0] == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(back[1] == doctest::Approx(5.0).epsilon(1e-12));

  Eigen::MatrixXd wrong(2, 3);
  wrong.setZero();
  CHECK_THROWS_AS(stats.apply(wrong), Error);
}

TEST_CASE("normalize_split fits statistics on the train side only") {
  Dataset data;
  data.name = "leak-check";
  data.features.resize(10, 1);
  for (int i = 0; i < 10; ++i) data.features(i, 0) = i;
  data.labels = Eigen::MatrixXd::Zero(10, 2);
  for (int i = 0; i < 10; ++i) {
    data.labels(i, i % 2) = 1.0;
    data.label_index.push_back(i % 2);
  }
  data.feature_names = {"x"};
  data.class_names = {"a", "b"};

  SplitIndices idx;
  idx.train = {0, 1, 2, 3, 4};   // mean 2, far below the full-data mean
  idx.test = {5, 6, 7, 8, 9};
  const SplitData sd = normalize_split(data, idx);

  CHECK(sd.train_x.rows() == 5);
  CHECK(sd.test_x.rows() == 5);
  CHECK(sd.train_y.rows() == 5);
  CHECK(sd.stats.mean[0] == doctest::Approx(2.0));
  CHECK(sd.train_x.col(0).mean() == doctest::Approx(0.0).epsilon(1e-12));
  // Test rows are shifted by the *train* mean, so they sit well above zero.
  CHECK(sd.test_x.col(0).minCoeff() > 1.0);
  // Labels travel with their rows.
  CHECK(sd.train_y(1, 1) == 1.0);
  CHECK(sd.test_y(0, 1) == 1.0);
}
