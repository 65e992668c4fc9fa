#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Plain data produced by the solver pipeline for each analysis node.
namespace deot {

enum class TaskStatus { Success, Failure, Skipped };

struct ExecutionRecord {
  std::string task_id;
  std::string task_name;
  TaskStatus status = TaskStatus::Skipped;
  std::string result;  // tool output, error message, or skip reason
  int started = -1;    // order index; -1 when never started
  int finished = -1;

  bool operator==(const ExecutionRecord&) const = default;
};

struct ExecutionSummary {
  std::string key_findings;
  std::vector<std::string> evidence;
  std::string analysis;
  std::vector<std::string> conflicts;
  std::string conclusion;
  std::string raw;  // completion text the summary was parsed from

  bool operator==(const ExecutionSummary&) const = default;
};

enum class Verdict { Valid, Invalid };
enum class Confidence { High, Medium, Low };

struct ValidationEntry {
  std::string task_id;  // empty for the summary validation
  Verdict status = Verdict::Valid;
  Confidence confidence = Confidence::High;
  std::vector<std::string> issues;
  std::vector<std::string> evidence;

  bool operator==(const ValidationEntry&) const = default;
};

struct ValidationReport {
  std::vector<ValidationEntry> task_validations;
  ValidationEntry summary_validation;

  bool operator==(const ValidationReport&) const = default;
};

std::string_view to_string(TaskStatus s) noexcept;
std::string_view to_string(Verdict v) noexcept;
std::string_view to_string(Confidence c) noexcept;
std::optional<TaskStatus> task_status_from_string(std::string_view s) noexcept;
std::optional<Verdict> verdict_from_string(std::string_view s) noexcept;
std::optional<Confidence> confidence_from_string(std::string_view s) noexcept;

}  // namespace deot
