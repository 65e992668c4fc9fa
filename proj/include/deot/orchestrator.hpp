#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "deot/backend.hpp"
#include "deot/context.hpp"
#include "deot/core.hpp"
#include "deot/prompter.hpp"
#include "deot/prompts.hpp"
#include "deot/toolbox.hpp"

namespace deot {

struct Metrics {
  int total_nodes = 0;
  int max_depth = 0;
  int breadth_analyses = 0;  // successful breadth expansions, not breadth nodes
  int depth_analyses = 0;

  bool operator==(const Metrics&) const = default;
};

Metrics metrics_of(const AnalysisTree& tree);

struct RunRecord {
  std::string run_id;
  RunConfig config;
  std::string root_query;  // the raw query as given
  OptimizedQuery optimized;
  AnalysisTree tree;
  std::string final_report;  // empty when the root failed
  Metrics metrics;
  TerminationStatus termination;
  std::vector<std::string> warnings;
  std::string transcript_ref;  // transcript file name, when one was written
  std::string started_at;      // ISO-8601 UTC
  std::string finished_at;

  /// False when the root node could not be answered.
  bool succeeded() const;
  bool operator==(const RunRecord&) const = default;
};

struct OrchestratorOptions {
  bool deterministic = false;  // fixed run id derivation and zeroed timestamps
  std::string run_id;          // overrides the derived id when non-empty
  bool parallel_tasks = false;
};

class Orchestrator {
 public:
  Orchestrator(BackendSet backends, const TemplateStore& templates, const ToolRegistry& registry,
               RunConfig config, OrchestratorOptions options = {});

  /// Plan, execute, summarize and fact-check one query. Any failure is
  /// rethrown as Error(NodeFailed) naming the underlying error.
  NodeAnswer solve_node(std::string_view query) const;

  /// The whole analysis. Query optimization failures propagate; a failed
  /// root yields a record whose succeeded() is false.
  RunRecord run(std::string_view raw_query);

  /// Synthesizes the report from every answered node plus the tree metrics.
  std::string final_response(std::string_view original_query, const AnalysisTree& tree) const;

  const RunConfig& config() const noexcept { return config_; }
  const RunLog& log() const noexcept { return log_; }

 private:
  ModelContext model() const;
  void solve_into(AnalysisTree& tree, NodeId id) const;
  void expand(AnalysisTree& tree, NodeId id, const std::string& original_query);

  BackendSet backends_;
  const TemplateStore& templates_;
  const ToolRegistry& registry_;
  RunConfig config_;
  OrchestratorOptions options_;
  mutable RunLog log_;
};

/// Node blocks as shown to the report generator: answered nodes only, in creation order.
std::string format_node_summaries(const AnalysisTree& tree);

}  // namespace deot
