#include "unfis/rules.hpp"

#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace unfis {

RuleReport extract_rules(const ModelParams& params,
                         const NormalizationStats& stats,
                         const std::vector<std::string>& feature_names,
                         const std::vector<std::string>& class_names,
                         double gate_threshold) {
  params.validate();
  const int n = params.input_count;
  if (stats.mean.size() != n) {
    fail(ErrorCategory::shape, "normalization stats do not match model width");
  }
  if (static_cast<int>(feature_names.size()) != n) {
    fail(ErrorCategory::shape, "feature name count does not match model");
  }
  if (static_cast<int>(class_names.size()) != params.class_count) {
    fail(ErrorCategory::shape, "class name count does not match model");
  }
  if (!(gate_threshold > 0.0 && gate_threshold < 1.0)) {
    fail(ErrorCategory::invalid_parameter,
         "gate threshold must lie strictly between 0 and 1");
  }

  const Eigen::MatrixXd gates = params.gates();
  RuleReport report;
  report.gate_threshold = gate_threshold;

  for (int i = 0; i < params.rule_count; ++i) {
    RuleEntry rule;
    rule.index = i;
    rule.active_count = gates.row(i).sum();
    for (int j = 0; j < n; ++j) {
      RuleFeature f;
      f.name = feature_names[static_cast<std::size_t>(j)];
      f.gate = gates(i, j);
      f.center = stats.mean[j] + stats.std[j] * params.centers(i, j);
      f.width = stats.std[j] * params.widths(i, j);
      f.selected = f.gate >= gate_threshold;
      rule.features.push_back(std::move(f));
    }
    for (int c = 0; c < params.class_count; ++c) {
      const Eigen::MatrixXd& a =
          params.coefficients[static_cast<std::size_t>(c)];
      RuleConsequent q;
      q.class_name = class_names[static_cast<std::size_t>(c)];
      q.bias = a(i, 0);
      // Effective coefficients: the gate scales each slope in the sum.
      for (int j = 0; j < n; ++j) {
        q.slopes.push_back(gates(i, j) * a(i, j + 1));
      }
      rule.consequents.push_back(std::move(q));
    }
    report.rules.push_back(std::move(rule));
  }
  return report;
}

std::string RuleReport::to_text() const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3);
  out << "gate threshold " << std::setprecision(2) << gate_threshold
      << std::setprecision(3)
      << "; premises in original units, consequents on standardized inputs\n";
  for (const RuleEntry& rule : rules) {
    out << "RULE " << (rule.index + 1) << " [active features "
        << rule.active_count << " of " << rule.features.size() << "]\n";
    bool any_selected = false;
    for (const RuleFeature& f : rule.features) {
      if (f.selected) any_selected = true;
    }
    if (!any_selected) {
      out << "IF (always)\n";
    } else {
      bool first = true;
      for (const RuleFeature& f : rule.features) {
        out << (first ? "IF " : "   AND ");
        first = false;
        if (f.selected) {
          out << f.name << " is around " << f.center << " ± " << f.width;
        } else {
          out << f.name << " is anything";
        }
        out << " [gate " << f.gate << "]\n";
      }
    }
    bool first = true;
    for (const RuleConsequent& q : rule.consequents) {
      out << (first ? "THEN " : "     ") << q.class_name << " = " << q.bias;
      first = false;
      for (std::size_t j = 0; j < q.slopes.size(); ++j) {
        const double s = q.slopes[j];
        out << (s < 0.0 ? " - " : " + ") << std::abs(s) << "*"
            << rule.features[j].name << "_z";
      }
      out << "\n";
    }
  }
  return out.str();
}

std::string RuleReport::to_json() const {
  nlohmann::json doc;
  doc["format"] = "unfis-rules";
  doc["version"] = 1;
  doc["gate_threshold"] = gate_threshold;
  nlohmann::json rule_array = nlohmann::json::array();
  for (const RuleEntry& rule : rules) {
    nlohmann::json r;
    r["index"] = rule.index;
    r["active_features"] = rule.active_count;
    nlohmann::json feats = nlohmann::json::array();
    for (const RuleFeature& f : rule.features) {
      feats.push_back({{"name", f.name},
                       {"gate", f.gate},
                       {"center", f.center},
                       {"width", f.width},
                       {"selected", f.selected}});
    }
    r["features"] = std::move(feats);
    nlohmann::json cons = nlohmann::json::array();
    for (const RuleConsequent& q : rule.consequents) {
      cons.push_back({{"class", q.class_name},
                      {"bias", q.bias},
                      {"slopes", q.slopes}});
    }
    r["consequents"] = std::move(cons);
    rule_array.push_back(std::move(r));
  }
  doc["rules"] = std::move(rule_array);
  return doc.dump(2) + "\n";
}

}  // namespace unfis
