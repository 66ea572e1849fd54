#pragma once

#include <string>
#include <vector>

#include "unfis/data.hpp"
#include "unfis/model.hpp"

namespace unfis {

// Everything needed to evaluate a trained model on raw inputs later:
// parameters, the train-split normalization, and the name mappings.
struct ModelDocument {
  ModelParams params;
  NormalizationStats stats;
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;
  int positive_class = -1;
  std::string dataset;
};

// JSON round-trip.  Doubles are written so that load(save(doc)) reproduces
// every parameter bit for bit; non-finite values are rejected at save time.
std::string to_json(const ModelDocument& doc);
ModelDocument model_from_json(const std::string& text);

void save_model(const ModelDocument& doc, const std::string& path);
ModelDocument load_model(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace unfis
