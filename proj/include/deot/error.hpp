#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace deot {

enum class Errc {
  InvalidInput,
  BudgetExceeded,
  UnknownParent,
  ParentNotAnswered,
  TransportError,
  EmptyCompletion,
  ScriptExhausted,
  MissingPlaceholder,
  UnknownPlaceholder,
  MalformedTemplate,
  MissingTemplate,
  MalformedModelOutput,
  PlanRejected,
  MalformedToolInput,
  UnknownTool,
  CyclicDependencies,
  NodeFailed,
  VersionMismatch,
  MalformedFile,
  ConfigError,
  IoError,
};

std::string_view to_string(Errc code) noexcept;

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }
  /// Message without the "[Code] " prefix that what() carries.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace deot
