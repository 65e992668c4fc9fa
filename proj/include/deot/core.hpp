#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deot/records.hpp"

namespace deot {

std::chrono::year_month_day today_utc();

/// Budgets and model settings for one analysis run.
struct RunConfig {
  int max_layer = 3;   // root is layer 1
  int max_nodes = 15;  // total node budget, root included
  int max_aspects = 3;
  double temperature = 0.0;
  int max_parse_retries = 2;
  int plan_retry_budget = 3;
  std::chrono::year_month_day run_date = today_utc();  // fact-check {current_date}

  /// Throws Error(InvalidInput) when a bound is violated.
  void validate() const;

  bool operator==(const RunConfig&) const = default;
};

std::string format_date(std::chrono::year_month_day date);
/// Parses YYYY-MM-DD; throws Error(InvalidInput).
std::chrono::year_month_day parse_date(std::string_view text);

struct NodeId {
  std::uint32_t value = 0;
  auto operator<=>(const NodeId&) const = default;
};

std::string to_string(NodeId id);
std::optional<NodeId> node_id_from_string(std::string_view text) noexcept;

enum class NodeOrigin { Root, Breadth, Depth };
enum class NodeStatus { Pending, Answered, Expanded, Terminal, Failed };

std::string_view to_string(NodeOrigin origin) noexcept;
std::string_view to_string(NodeStatus status) noexcept;
std::optional<NodeOrigin> node_origin_from_string(std::string_view s) noexcept;
std::optional<NodeStatus> node_status_from_string(std::string_view s) noexcept;

struct NodeAnswer {
  ExecutionSummary summary;
  ValidationReport validation;
  std::vector<ExecutionRecord> raw_task_records;
  std::vector<std::string> flags;  // unresolved validation problems, kept for review

  bool operator==(const NodeAnswer&) const = default;
};

struct AnalysisNode {
  NodeId id;
  int layer = 1;
  std::optional<NodeId> parent;
  NodeOrigin origin = NodeOrigin::Root;
  std::string query;
  std::optional<NodeAnswer> answer;
  NodeStatus status = NodeStatus::Pending;
  std::vector<NodeId> children;
  std::string failure;  // set when status == Failed

  bool operator==(const AnalysisNode&) const = default;
};

/// Layered query/answer tree. Nodes are stored in creation order and ids are
/// assigned sequentially from 1, so creation order doubles as id order.
class AnalysisTree {
 public:
  /// Empty placeholder; real trees come from create() or restore().
  AnalysisTree() = default;

  /// Throws Error(InvalidInput) for an empty query.
  static AnalysisTree create(std::string root_query);

  /// Appends a Pending child one layer below `parent` and marks the parent
  /// Expanded. The parent must be Answered (or already Expanded by the same
  /// expansion). Throws UnknownParent, ParentNotAnswered, BudgetExceeded or
  /// InvalidInput.
  NodeId add_child(NodeId parent, std::string query, NodeOrigin origin, const RunConfig& config);

  void set_answer(NodeId id, NodeAnswer answer);
  void mark_failed(NodeId id, std::string reason);
  void mark_terminal(NodeId id);
  void record_expansion(NodeOrigin kind);

  const AnalysisNode& node(NodeId id) const;
  const AnalysisNode& root() const { return nodes_.front(); }
  std::span<const AnalysisNode> nodes() const { return nodes_; }
  std::vector<NodeId> creation_order() const;
  /// Answered nodes not yet expanded or closed, in creation order.
  std::vector<NodeId> frontier() const;

  std::size_t size() const noexcept { return nodes_.size(); }
  int max_depth() const noexcept;
  int breadth_expansions() const noexcept { return breadth_expansions_; }
  int depth_expansions() const noexcept { return depth_expansions_; }

  /// Structural invariant violations; empty for a well-formed tree.
  std::vector<std::string> structural_problems() const;

  /// Rebuilds a tree from stored parts (used when loading run records).
  /// Throws Error(MalformedFile) when the result violates tree invariants.
  static AnalysisTree restore(std::vector<AnalysisNode> nodes, int breadth_expansions,
                              int depth_expansions);

  bool operator==(const AnalysisTree&) const = default;

 private:
  AnalysisNode& mutable_node(NodeId id);

  std::vector<AnalysisNode> nodes_;
  int breadth_expansions_ = 0;
  int depth_expansions_ = 0;
};

enum class TerminationCause { None, MaxLayerReached, MaxNodesReached, FrontierExhausted };
std::string_view to_string(TerminationCause cause) noexcept;
std::optional<TerminationCause> termination_cause_from_string(std::string_view s) noexcept;

struct TerminationStatus {
  bool should_stop = false;
  TerminationCause cause = TerminationCause::None;

  bool operator==(const TerminationStatus&) const = default;
};

/// Precedence: MaxNodesReached > MaxLayerReached > FrontierExhausted > None.
/// MaxLayerReached means every frontier node already sits at max_layer.
TerminationStatus check_termination(const AnalysisTree& tree, const RunConfig& config,
                                    std::span<const NodeId> frontier);

/// Graphviz digraph: one edge per parent/child pair, labels carry layer and origin.
std::string to_dot(const AnalysisTree& tree);

}  // namespace deot
