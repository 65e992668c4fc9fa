#include "deot/error.hpp"

namespace deot {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidInput: return "InvalidInput";
    case Errc::BudgetExceeded: return "BudgetExceeded";
    case Errc::UnknownParent: return "UnknownParent";
    case Errc::ParentNotAnswered: return "ParentNotAnswered";
    case Errc::TransportError: return "TransportError";
    case Errc::EmptyCompletion: return "EmptyCompletion";
    case Errc::ScriptExhausted: return "ScriptExhausted";
    case Errc::MissingPlaceholder: return "MissingPlaceholder";
    case Errc::UnknownPlaceholder: return "UnknownPlaceholder";
    case Errc::MalformedTemplate: return "MalformedTemplate";
    case Errc::MissingTemplate: return "MissingTemplate";
    case Errc::MalformedModelOutput: return "MalformedModelOutput";
    case Errc::PlanRejected: return "PlanRejected";
    case Errc::MalformedToolInput: return "MalformedToolInput";
    case Errc::UnknownTool: return "UnknownTool";
    case Errc::CyclicDependencies: return "CyclicDependencies";
    case Errc::NodeFailed: return "NodeFailed";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::MalformedFile: return "MalformedFile";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error("[" + std::string(to_string(code)) + "] " + message),
      code_(code),
      detail_(message) {}

}  // namespace deot
