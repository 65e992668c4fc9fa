#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "deot/context.hpp"

namespace deot {

struct ErrorHandling {
  std::string original_error;
  std::string correction_explanation;
  std::string previous_attempt_analysis;

  bool operator==(const ErrorHandling&) const = default;
};

struct OptimizedQuery {
  std::string optimized_query;
  std::string original_query;
  std::vector<std::string> modifications;
  std::optional<ErrorHandling> error_handling;  // present only after recovery

  bool operator==(const OptimizedQuery&) const = default;
};

/// Parses the optimizer's JSON object. Exactly the documented keys are
/// accepted: three for a plain answer, four (with error_handling) for a
/// recovery answer. Throws Error(MalformedModelOutput).
OptimizedQuery parse_optimized_query(std::string_view completion, bool expect_error_handling);
std::string format_optimized_query(const OptimizedQuery& q);

class Prompter {
 public:
  explicit Prompter(ModelContext ctx) : ctx_(ctx) {}

  /// Issues at most 1 + max_parse_retries model calls.
  OptimizedQuery optimize_query(std::string_view raw) const;
  OptimizedQuery recover_query(std::string_view original, std::string_view error_message,
                               std::string_view failed_result) const;

 private:
  OptimizedQuery recover(std::string_view original, std::string_view error_message,
                         std::string_view failed_result, std::string& completion) const;

  ModelContext ctx_;
};

}  // namespace deot
