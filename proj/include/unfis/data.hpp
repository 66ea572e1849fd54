#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "unfis/errors.hpp"

namespace unfis {

// Parsed but untyped CSV content.
struct RawTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

RawTable load_csv(const std::string& path);

struct DatasetSchema {
  struct Feature {
    std::string column;
    bool categorical = false;
    std::vector<std::string> categories;  // order defines the numeric code
  };

  std::string name;
  std::string label_column;
  std::vector<std::string> class_names;  // declared order = one-hot order
  std::map<std::string, std::string> label_aliases;  // raw value -> class name
  std::optional<std::string> positive_class;         // binary AUC target
  std::vector<Feature> features;
  std::optional<int> expected_rows;

  static DatasetSchema load(const std::string& path);
  int positive_class_index() const;  // -1 when not declared
};

struct Dataset {
  std::string name;
  Eigen::MatrixXd features;      // N x n, raw values
  Eigen::MatrixXd labels;        // N x C one-hot
  std::vector<int> label_index;  // N
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;
  int positive_class = -1;
  int dropped_rows = 0;  // rows removed for missing cells

  int sample_count() const { return static_cast<int>(features.rows()); }
  int feature_count() const { return static_cast<int>(features.cols()); }
  int class_count() const { return static_cast<int>(labels.cols()); }
};

// Applies a schema to a CSV file: selects + orders columns, encodes
// categoricals, maps labels to one-hot rows, drops rows with missing cells
// ("" or "?").  Any other inconsistency is an ingestion error that names
// the row and column.
Dataset load_dataset(const std::string& csv_path, const DatasetSchema& schema);
Dataset load_dataset(const RawTable& table, const DatasetSchema& schema);

struct SplitSpec {
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
  int repetition = 0;      // folded into the seed
  bool stratified = false; // off for reproduction runs
};

struct SplitIndices {
  std::vector<int> train;
  std::vector<int> test;
};

// Random split.  The train size is floor(fraction * N) with a small epsilon
// guard against values like 0.7*90 = 62.999...; clamped to [1, N-1].
SplitIndices split(int sample_count, const std::vector<int>& label_index,
                   const SplitSpec& spec);

struct NormalizationStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;  // zero-spread dimensions stored as 1

  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::VectorXd invert(const Eigen::VectorXd& z) const;  // undo apply
};

NormalizationStats fit_normalization(const Eigen::MatrixXd& X);

struct SplitData {
  Eigen::MatrixXd train_x, train_y;
  Eigen::MatrixXd test_x, test_y;
  NormalizationStats stats;  // fitted on the train split only
};

// Gathers the split rows and z-scores both sides with train statistics.
SplitData normalize_split(const Dataset& data, const SplitIndices& indices);

}  // namespace unfis
