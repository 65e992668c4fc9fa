#include "deot/records.hpp"

namespace deot {

std::string_view to_string(TaskStatus s) noexcept {
  switch (s) {
    case TaskStatus::Success: return "Success";
    case TaskStatus::Failure: return "Failure";
    case TaskStatus::Skipped: return "Skipped";
  }
  return "Skipped";
}

std::string_view to_string(Verdict v) noexcept { return v == Verdict::Valid ? "VALID" : "INVALID"; }

std::string_view to_string(Confidence c) noexcept {
  switch (c) {
    case Confidence::High: return "HIGH";
    case Confidence::Medium: return "MEDIUM";
    case Confidence::Low: return "LOW";
  }
  return "LOW";
}

std::optional<TaskStatus> task_status_from_string(std::string_view s) noexcept {
  if (s == "Success") return TaskStatus::Success;
  if (s == "Failure") return TaskStatus::Failure;
  if (s == "Skipped") return TaskStatus::Skipped;
  return std::nullopt;
}

std::optional<Verdict> verdict_from_string(std::string_view s) noexcept {
  if (s == "VALID") return Verdict::Valid;
  if (s == "INVALID") return Verdict::Invalid;
  return std::nullopt;
}

std::optional<Confidence> confidence_from_string(std::string_view s) noexcept {
  if (s == "HIGH") return Confidence::High;
  if (s == "MEDIUM") return Confidence::Medium;
  if (s == "LOW") return Confidence::Low;
  return std::nullopt;
}

}  // namespace deot
