#pragma once

#include <string>
#include <vector>

#include "unfis/data.hpp"
#include "unfis/model.hpp"

namespace unfis {

struct RuleFeature {
  std::string name;
  double gate = 0.0;    // sigma(s)
  double center = 0.0;  // de-normalized
  double width = 0.0;   // de-normalized
  bool selected = false;
};

struct RuleConsequent {
  std::string class_name;
  double bias = 0.0;
  std::vector<double> slopes;  // gate-weighted, per selected feature order
};

struct RuleEntry {
  int index = 0;
  std::vector<RuleFeature> features;  // all features, selected flag set
  double active_count = 0.0;          // sum of gate values
  std::vector<RuleConsequent> consequents;
};

struct RuleReport {
  double gate_threshold = 0.5;
  std::vector<RuleEntry> rules;

  // One IF-THEN block per rule; selected features read "is around c +/- w",
  // deselected ones "is anything", and an all-deselected antecedent
  // collapses to "IF (always)".  The format is golden-file stable.
  std::string to_text() const;
  std::string to_json() const;
};

// Reads the fuzzy rules out of a trained model.  Centers/widths are mapped
// back to original units through the normalization stats; consequent slopes
// are reported gate-weighted (the effective coefficient in the sum).
RuleReport extract_rules(const ModelParams& params,
                         const NormalizationStats& stats,
                         const std::vector<std::string>& feature_names,
                         const std::vector<std::string>& class_names,
                         double gate_threshold = 0.5);

}  // namespace unfis
