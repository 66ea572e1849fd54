#pragma once

#include <stdexcept>
#include <string>

namespace unfis {

// Every failure the library can raise falls into one of these buckets.
// The CLI maps each bucket to a distinct process exit code so scripts can
// tell ingestion problems from solver problems without parsing stderr.
enum class ErrorCategory {
  ingestion,             // malformed CSV / schema mismatch
  invalid_parameter,     // bad config value (M < 1, lambda < 0, ...)
  shape,                 // dimension mismatch between tensors
  degenerate_firing,     // all rule firings vanished for a sample
  gradient_overflow,     // non-finite Jacobian entries
  solver,                // linear solve failed
  divergence,            // training loss became non-finite
  infeasible_clustering, // R > N at initialization
  undefined_metric,      // AUC requested where a class is absent
  empty_evaluation,      // metric over an empty set
  io,                    // file read/write failure
};

const char* to_string(ErrorCategory c);
int exit_code(ErrorCategory c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

[[noreturn]] void fail(ErrorCategory category, const std::string& message);

}  // namespace unfis
