#include "unfis/errors.hpp"

namespace unfis {

const char* to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::ingestion: return "ingestion";
    case ErrorCategory::invalid_parameter: return "invalid-parameter";
    case ErrorCategory::shape: return "shape";
    case ErrorCategory::degenerate_firing: return "degenerate-firing";
    case ErrorCategory::gradient_overflow: return "gradient-overflow";
    case ErrorCategory::solver: return "solver";
    case ErrorCategory::divergence: return "divergence";
    case ErrorCategory::infeasible_clustering: return "infeasible-clustering";
    case ErrorCategory::undefined_metric: return "undefined-metric";
    case ErrorCategory::empty_evaluation: return "empty-evaluation";
    case ErrorCategory::io: return "io";
  }
  return "unknown";
}

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::ingestion: return 10;
    case ErrorCategory::invalid_parameter: return 11;
    case ErrorCategory::shape: return 12;
    case ErrorCategory::degenerate_firing: return 13;
    case ErrorCategory::gradient_overflow: return 14;
    case ErrorCategory::solver: return 15;
    case ErrorCategory::divergence: return 16;
    case ErrorCategory::infeasible_clustering: return 17;
    case ErrorCategory::undefined_metric: return 18;
    case ErrorCategory::empty_evaluation: return 19;
    case ErrorCategory::io: return 20;
  }
  return 1;
}

void fail(ErrorCategory category, const std::string& message) {
  throw Error(category, std::string(to_string(category)) + ": " + message);
}

}  // namespace unfis
