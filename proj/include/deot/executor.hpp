#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "deot/context.hpp"
#include "deot/planner.hpp"
#include "deot/records.hpp"
#include "deot/toolbox.hpp"

namespace deot {

using Waves = std::vector<std::vector<std::string>>;

/// Kahn layering: wave k holds the tasks whose dependencies all sit in earlier
/// waves, in plan order. Throws Error(CyclicDependencies).
Waves schedule(const TaskPlan& plan);

/// Input for a dependent task: the planned input followed by the results of
/// its direct dependencies.
std::string with_dependency_context(std::string_view input,
                                    const std::vector<const ExecutionRecord*>& dependencies);

class Executor {
 public:
  explicit Executor(const Toolbox& toolbox, bool parallel = false)
      : toolbox_(toolbox), parallel_(parallel) {}

  /// Runs the plan wave by wave. Tool failures become Failure records, tasks
  /// behind a failed dependency are Skipped, and records come back in plan order.
  std::vector<ExecutionRecord> execute(const TaskPlan& plan) const;

 private:
  const Toolbox& toolbox_;
  bool parallel_;
};

/// Per-task result blocks fed to the summarizer.
std::string format_task_results(const std::vector<ExecutionRecord>& records);

/// Parses the [SUMMARY] ... [END SUMMARY] block. Throws Error(MalformedModelOutput).
ExecutionSummary parse_summary(std::string_view completion);
std::string format_summary(const ExecutionSummary& summary);

/// Parses every [TASK VALIDATION] block and the single [SUMMARY VALIDATION]
/// block. Throws Error(MalformedModelOutput).
ValidationReport parse_validation(std::string_view completion);
std::string format_validation(const ValidationReport& report);

class Summarizer {
 public:
  explicit Summarizer(ModelContext ctx) : ctx_(ctx) {}

  /// `issues` come from a failed fact check and are shown to the model.
  ExecutionSummary summarize(std::string_view original_query, const std::vector<ExecutionRecord>& records,
                             const std::vector<std::string>& issues = {}) const;
  ValidationReport fact_check(std::string_view query, std::string_view source, std::string_view content,
                              const ExecutionSummary& summary) const;

 private:
  ModelContext ctx_;
};

}  // namespace deot
