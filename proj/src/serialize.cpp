#include "unfis/serialize.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace unfis {
namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows, int expect_rows,
                                 int expect_cols, const char* name) {
  Eigen::MatrixXd m(expect_rows, expect_cols);
  if (static_cast<int>(rows.size()) != expect_rows) {
    fail(ErrorCategory::shape, std::string(name) + ": row count mismatch");
  }
  for (int i = 0; i < expect_rows; ++i) {
    if (static_cast<int>(rows[i].size()) != expect_cols) {
      fail(ErrorCategory::shape, std::string(name) + ": column count mismatch");
    }
    for (int j = 0; j < expect_cols; ++j) m(i, j) = rows[i][j].get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const json& arr, int expect, const char* name) {
  if (static_cast<int>(arr.size()) != expect) {
    fail(ErrorCategory::shape, std::string(name) + ": length mismatch");
  }
  Eigen::VectorXd v(expect);
  for (int i = 0; i < expect; ++i) v[i] = arr[i].get<double>();
  return v;
}

void require_finite(const ModelDocument& doc) {
  const bool ok = doc.params.centers.allFinite() &&
                  doc.params.widths.allFinite() &&
                  doc.params.gate_logits.allFinite() &&
                  doc.params.thresholds.allFinite() &&
                  doc.stats.mean.allFinite() && doc.stats.std.allFinite() &&
                  std::all_of(doc.params.coefficients.begin(),
                              doc.params.coefficients.end(),
                              [](const Eigen::MatrixXd& m) {
                                return m.allFinite();
                              });
  if (!ok) {
    fail(ErrorCategory::invalid_parameter,
         "refusing to serialize non-finite model parameters");
  }
}

}  // namespace

std::string to_json(const ModelDocument& doc) {
  doc.params.validate();
  require_finite(doc);
  json out;
  out["format"] = "unfis-model";
  out["version"] = 1;
  out["dataset"] = doc.dataset;
  out["rules"] = doc.params.rule_count;
  out["inputs"] = doc.params.input_count;
  out["classes"] = doc.params.class_count;
  out["selection"] = doc.params.selection_enabled;
  out["epsilon"] = doc.params.epsilon;
  out["centers"] = matrix_to_json(doc.params.centers);
  out["widths"] = matrix_to_json(doc.params.widths);
  out["gate_logits"] = matrix_to_json(doc.params.gate_logits);
  json coeffs = json::array();
  for (const Eigen::MatrixXd& block : doc.params.coefficients) {
    coeffs.push_back(matrix_to_json(block));
  }
  out["coefficients"] = std::move(coeffs);
  out["thresholds"] = vector_to_json(doc.params.thresholds);
  out["normalization"] = {{"mean", vector_to_json(doc.stats.mean)},
                          {"std", vector_to_json(doc.stats.std)}};
  out["feature_names"] = doc.feature_names;
  out["class_names"] = doc.class_names;
  out["positive_class"] = doc.positive_class;
  return out.dump(2) + "\n";
}

ModelDocument model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCategory::io, std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != "unfis-model") {
      fail(ErrorCategory::io, "not a model file (format field mismatch)");
    }
    const int R = doc.at("rules").get<int>();
    const int n = doc.at("inputs").get<int>();
    const int C = doc.at("classes").get<int>();
    ModelDocument out;
    out.params = ModelParams::zeros(R, n, C, doc.at("selection").get<bool>(),
                                    doc.at("epsilon").get<double>());
    out.params.centers = matrix_from_json(doc.at("centers"), R, n, "centers");
    out.params.widths = matrix_from_json(doc.at("widths"), R, n, "widths");
    out.params.gate_logits =
        matrix_from_json(doc.at("gate_logits"), R, n, "gate_logits");
    const json& coeffs = doc.at("coefficients");
    if (static_cast<int>(coeffs.size()) != C) {
      fail(ErrorCategory::shape, "coefficient block count mismatch");
    }
    for (int c = 0; c < C; ++c) {
      out.params.coefficients[static_cast<std::size_t>(c)] =
          matrix_from_json(coeffs[c], R, n + 1, "coefficients");
    }
    out.params.thresholds =
        vector_from_json(doc.at("thresholds"), C, "thresholds");
    out.stats.mean =
        vector_from_json(doc.at("normalization").at("mean"), n, "mean");
    out.stats.std =
        vector_from_json(doc.at("normalization").at("std"), n, "std");
    out.feature_names =
        doc.at("feature_names").get<std::vector<std::string>>();
    out.class_names = doc.at("class_names").get<std::vector<std::string>>();
    out.positive_class = doc.at("positive_class").get<int>();
    out.dataset = doc.value("dataset", std::string{});
    out.params.validate();
    return out;
  } catch (const json::exception& e) {
    fail(ErrorCategory::io, std::string("model file is missing fields: ") + e.what());
  }
}

void save_model(const ModelDocument& doc, const std::string& path) {
  write_text_file(path, to_json(doc));
}

ModelDocument load_model(const std::string& path) {
  return model_from_json(read_text_file(path));
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    fail(ErrorCategory::io, "cannot open '" + path + "' for writing");
  }
  out << content;
  if (!out) {
    fail(ErrorCategory::io, "write to '" + path + "' failed");
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(ErrorCategory::io, "cannot open '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace unfis
