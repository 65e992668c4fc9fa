#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "deot/context.hpp"
#include "deot/toolbox.hpp"

namespace deot {

struct TaskSpec {
  std::string task;
  std::string id;
  std::string name;  // tool name
  std::string input;
  std::string reason;
  std::vector<std::string> dep;

  bool operator==(const TaskSpec&) const = default;
};

struct TaskPlan {
  std::vector<TaskSpec> tasks;

  bool operator==(const TaskPlan&) const = default;
};

/// Parses the planner's JSON task array; every element needs the six task
/// fields. Throws Error(MalformedModelOutput).
TaskPlan parse_task_plan(std::string_view completion);
std::string format_task_plan(const TaskPlan& plan);

enum class ViolationKind {
  TaskCount,
  EmptyId,
  DuplicateId,
  EmptyInput,
  UnknownTool,
  DanglingDependency,
  CyclicDependency,
  NewsInputFormat,
};
std::string_view to_string(ViolationKind kind) noexcept;

struct Violation {
  ViolationKind kind;
  std::string task_id;  // empty for plan-level violations
  std::string message;

  auto operator<=>(const Violation&) const = default;
};

/// Mechanical plan rules. The result is sorted, so it does not depend on task order.
std::vector<Violation> check_format(const TaskPlan& plan, const ToolRegistry& registry);
std::string format_violations(const std::vector<Violation>& violations);

inline constexpr std::string_view kPlanAcceptedSentinel =
    "The plan satisfies completeness and non-redundancy.";

struct PlanVerdict {
  bool passed = false;
  std::string feedback;

  bool operator==(const PlanVerdict&) const = default;
};

/// Accepts when the validator's reply contains the sentinel sentence, ignoring
/// case, whitespace runs and the final period.
PlanVerdict interpret_validation(std::string_view completion);

class Planner {
 public:
  Planner(ModelContext ctx, const ToolRegistry& registry) : ctx_(ctx), registry_(registry) {}

  /// Decompose, check, validate, and regenerate until a plan is accepted.
  /// At most plan_retry_budget planning calls; throws Error(PlanRejected)
  /// carrying the last feedback.
  TaskPlan decompose(std::string_view query) const;
  PlanVerdict validate_plan(std::string_view query, const TaskPlan& plan) const;
  /// One regeneration call. Throws MalformedModelOutput, or PlanRejected when
  /// the new plan breaks a format rule.
  TaskPlan regenerate(std::string_view query, std::string_view feedback) const;

 private:
  TaskPlan checked(const std::string& completion) const;

  ModelContext ctx_;
  const ToolRegistry& registry_;
};

}  // namespace deot
