#include "unfis/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "unfis/rng.hpp"

namespace unfis {
namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell.push_back(ch);
    }
  }
  cells.push_back(cell);
  return cells;
}

std::string trimmed(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

bool is_missing(const std::string& cell) {
  return cell.empty() || cell == "?" || cell == "NA";
}

}  // namespace

RawTable load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    fail(ErrorCategory::io, "cannot open '" + path + "'");
  }
  RawTable table;
  std::string line;
  if (!std::getline(in, line)) {
    fail(ErrorCategory::ingestion, "'" + path + "' is empty");
  }
  for (std::string& col : (table.columns = split_csv_line(line))) {
    col = trimmed(col);
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trimmed(line).empty()) continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != table.columns.size()) {
      std::ostringstream msg;
      msg << "'" << path << "' line " << line_no << " has " << cells.size()
          << " cells, header has " << table.columns.size();
      fail(ErrorCategory::ingestion, msg.str());
    }
    for (std::string& c : cells) c = trimmed(c);
    table.rows.push_back(std::move(cells));
  }
  return table;
}

DatasetSchema DatasetSchema::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    fail(ErrorCategory::io, "cannot open schema '" + path + "'");
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCategory::ingestion,
         "schema '" + path + "' is not valid JSON: " + e.what());
  }
  DatasetSchema schema;
  try {
    schema.name = doc.at("name").get<std::string>();
    schema.label_column = doc.at("label_column").get<std::string>();
    schema.class_names = doc.at("classes").get<std::vector<std::string>>();
    if (doc.contains("label_aliases")) {
      for (const auto& [key, value] : doc.at("label_aliases").items()) {
        schema.label_aliases[key] = value.get<std::string>();
      }
    }
    if (doc.contains("positive_class")) {
      schema.positive_class = doc.at("positive_class").get<std::string>();
    }
    for (const json& f : doc.at("features")) {
      Feature feature;
      feature.column = f.at("column").get<std::string>();
      if (f.contains("categories")) {
        feature.categorical = true;
        feature.categories = f.at("categories").get<std::vector<std::string>>();
      }
      schema.features.push_back(std::move(feature));
    }
    if (doc.contains("expected_rows")) {
      schema.expected_rows = doc.at("expected_rows").get<int>();
    }
  } catch (const json::exception& e) {
    fail(ErrorCategory::ingestion,
         "schema '" + path + "' is missing fields: " + e.what());
  }
  if (schema.class_names.size() < 2) {
    fail(ErrorCategory::ingestion,
         "schema '" + path + "' declares fewer than two classes");
  }
  if (schema.features.empty()) {
    fail(ErrorCategory::ingestion,
         "schema '" + path + "' declares no features");
  }
  if (schema.positive_class.has_value() && schema.positive_class_index() < 0) {
    fail(ErrorCategory::ingestion,
         "schema '" + path + "' positive_class is not one of the classes");
  }
  return schema;
}

int DatasetSchema::positive_class_index() const {
  if (!positive_class.has_value()) return -1;
  const auto it =
      std::find(class_names.begin(), class_names.end(), *positive_class);
  return it == class_names.end()
             ? -1
             : static_cast<int>(it - class_names.begin());
}

Dataset load_dataset(const std::string& csv_path,
                     const DatasetSchema& schema) {
  return load_dataset(load_csv(csv_path), schema);
}

Dataset load_dataset(const RawTable& table, const DatasetSchema& schema) {
  auto column_of = [&](const std::string& name) {
    const auto it =
        std::find(table.columns.begin(), table.columns.end(), name);
    if (it == table.columns.end()) {
      fail(ErrorCategory::ingestion,
           "column '" + name + "' not present in CSV header");
    }
    return static_cast<std::size_t>(it - table.columns.begin());
  };

  const std::size_t label_col = column_of(schema.label_column);
  std::vector<std::size_t> feature_cols;
  for (const auto& f : schema.features) feature_cols.push_back(column_of(f.column));

  const int C = static_cast<int>(schema.class_names.size());
  const int n = static_cast<int>(schema.features.size());

  std::vector<Eigen::RowVectorXd> kept_rows;
  std::vector<int> labels;
  int dropped = 0;

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cells = table.rows[r];
    bool missing = is_missing(cells[label_col]);
    for (std::size_t c : feature_cols) missing = missing || is_missing(cells[c]);
    if (missing) {
      ++dropped;
      continue;
    }

    std::string label = cells[label_col];
    if (const auto it = schema.label_aliases.find(label);
        it != schema.label_aliases.end()) {
      label = it->second;
    }
    const auto cls = std::find(schema.class_names.begin(),
                               schema.class_names.end(), label);
    if (cls == schema.class_names.end()) {
      std::ostringstream msg;
      msg << "row " << (r + 2) << ": label '" << cells[label_col]
          << "' is not a declared class";
      fail(ErrorCategory::ingestion, msg.str());
    }

    Eigen::RowVectorXd x(n);
    for (int j = 0; j < n; ++j) {
      const std::string& cell = cells[feature_cols[static_cast<std::size_t>(j)]];
      const auto& feature = schema.features[static_cast<std::size_t>(j)];
      if (feature.categorical) {
        const auto cat = std::find(feature.categories.begin(),
                                   feature.categories.end(), cell);
        if (cat == feature.categories.end()) {
          std::ostringstream msg;
          msg << "row " << (r + 2) << ", column '" << feature.column
              << "': value '" << cell << "' is not a declared category";
          fail(ErrorCategory::ingestion, msg.str());
        }
        x[j] = static_cast<double>(cat - feature.categories.begin());
      } else {
        try {
          std::size_t used = 0;
          x[j] = std::stod(cell, &used);
          if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
          std::ostringstream msg;
          msg << "row " << (r + 2) << ", column '" << feature.column
              << "': cannot parse '" << cell << "' as a number";
          fail(ErrorCategory::ingestion, msg.str());
        }
      }
    }
    kept_rows.push_back(std::move(x));
    labels.push_back(static_cast<int>(cls - schema.class_names.begin()));
  }

  if (kept_rows.empty()) {
    fail(ErrorCategory::ingestion, "no usable rows after dropping missing data");
  }
  if (schema.expected_rows.has_value() &&
      static_cast<int>(kept_rows.size()) != *schema.expected_rows) {
    std::ostringstream msg;
    msg << "expected " << *schema.expected_rows << " rows, got "
        << kept_rows.size() << " (after dropping " << dropped << ")";
    fail(ErrorCategory::ingestion, msg.str());
  }

  Dataset data;
  data.name = schema.name;
  data.features.resize(static_cast<Eigen::Index>(kept_rows.size()), n);
  for (std::size_t r = 0; r < kept_rows.size(); ++r) {
    data.features.row(static_cast<Eigen::Index>(r)) = kept_rows[r];
  }
  data.labels = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(labels.size()), C);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    data.labels(static_cast<Eigen::Index>(r), labels[r]) = 1.0;
  }
  data.label_index = std::move(labels);
  for (const auto& f : schema.features) data.feature_names.push_back(f.column);
  data.class_names = schema.class_names;
  data.positive_class = schema.positive_class_index();
  data.dropped_rows = dropped;
  return data;
}

SplitIndices split(int sample_count, const std::vector<int>& label_index,
                   const SplitSpec& spec) {
  if (sample_count < 2) {
    fail(ErrorCategory::invalid_parameter,
         "need at least two samples to split");
  }
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    fail(ErrorCategory::invalid_parameter,
         "train fraction must lie strictly between 0 and 1");
  }
  // floor() with an epsilon guard: 0.7 * 90 evaluates to 62.999...99 in
  // binary floating point, and the intended count is 63.
  int train_count = static_cast<int>(
      std::floor(spec.train_fraction * sample_count + 1e-9));
  train_count = std::clamp(train_count, 1, sample_count - 1);

  Rng rng(spec.seed + static_cast<std::uint64_t>(spec.repetition));
  SplitIndices out;

  if (!spec.stratified) {
    std::vector<int> order = rng.permutation(sample_count);
    out.train.assign(order.begin(), order.begin() + train_count);
    out.test.assign(order.begin() + train_count, order.end());
  } else {
    if (static_cast<int>(label_index.size()) != sample_count) {
      fail(ErrorCategory::shape,
           "stratified split needs one label per sample");
    }
    const int C =
        1 + *std::max_element(label_index.begin(), label_index.end());
    std::vector<std::vector<int>> buckets(static_cast<std::size_t>(C));
    for (int r = 0; r < sample_count; ++r) {
      buckets[static_cast<std::size_t>(label_index[static_cast<std::size_t>(r)])]
          .push_back(r);
    }
    for (auto& bucket : buckets) {
      rng.shuffle(bucket);
      const int take = static_cast<int>(std::floor(
          spec.train_fraction * static_cast<double>(bucket.size()) + 1e-9));
      for (std::size_t i = 0; i < bucket.size(); ++i) {
        (static_cast<int>(i) < take ? out.train : out.test)
            .push_back(bucket[i]);
      }
    }
    // Top up from the test side if rounding left the train side short.
    while (static_cast<int>(out.train.size()) < train_count &&
           out.test.size() > 1) {
      out.train.push_back(out.test.back());
      out.test.pop_back();
    }
  }
  if (out.train.empty() || out.test.empty()) {
    fail(ErrorCategory::invalid_parameter, "split produced an empty side");
  }
  return out;
}

Eigen::MatrixXd NormalizationStats::apply(const Eigen::MatrixXd& X) const {
  if (X.cols() != mean.size()) {
    fail(ErrorCategory::shape, "normalization stats do not match input width");
  }
  return (X.rowwise() - mean.transpose()).array().rowwise() /
         std.transpose().array();
}

Eigen::VectorXd NormalizationStats::apply(const Eigen::VectorXd& x) const {
  if (x.size() != mean.size()) {
    fail(ErrorCategory::shape, "normalization stats do not match input width");
  }
  return (x - mean).cwiseQuotient(std);
}

Eigen::VectorXd NormalizationStats::invert(const Eigen::VectorXd& z) const {
  if (z.size() != mean.size()) {
    fail(ErrorCategory::shape, "normalization stats do not match input width");
  }
  return mean + z.cwiseProduct(std);
}

NormalizationStats fit_normalization(const Eigen::MatrixXd& X) {
  if (X.rows() < 1) {
    fail(ErrorCategory::empty_evaluation, "cannot fit normalization on empty X");
  }
  NormalizationStats stats;
  stats.mean = X.colwise().mean();
  stats.std.resize(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double ss = (X.col(j).array() - stats.mean[j]).square().sum();
    const double sd =
        X.rows() > 1 ? std::sqrt(ss / static_cast<double>(X.rows() - 1)) : 0.0;
    stats.std[j] = sd > 0.0 ? sd : 1.0;  // constant column: leave centered
  }
  return stats;
}

SplitData normalize_split(const Dataset& data, const SplitIndices& indices) {
  auto gather = [&](const std::vector<int>& rows, const Eigen::MatrixXd& src) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), src.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out.row(static_cast<Eigen::Index>(i)) = src.row(rows[i]);
    }
    return out;
  };
  SplitData split_data;
  Eigen::MatrixXd train_raw = gather(indices.train, data.features);
  Eigen::MatrixXd test_raw = gather(indices.test, data.features);
  split_data.stats = fit_normalization(train_raw);
  split_data.train_x = split_data.stats.apply(train_raw);
  split_data.test_x = split_data.stats.apply(test_raw);
  split_data.train_y = gather(indices.train, data.labels);
  split_data.test_y = gather(indices.test, data.labels);
  return split_data;
}

}  // namespace unfis
