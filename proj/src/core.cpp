#include "deot/core.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "deot/error.hpp"
#include "deot/text.hpp"

namespace deot {

std::chrono::year_month_day today_utc() {
  return std::chrono::year_month_day{
      std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now())};
}

void RunConfig::validate() const {
  if (max_layer < 1) throw Error(Errc::InvalidInput, "max_layer must be >= 1");
  if (max_nodes < 1) throw Error(Errc::InvalidInput, "max_nodes must be >= 1");
  if (max_aspects < 1) throw Error(Errc::InvalidInput, "max_aspects must be >= 1");
  if (!(temperature >= 0.0 && temperature <= 1.0)) {
    throw Error(Errc::InvalidInput, "temperature must lie in [0, 1]");
  }
  if (max_parse_retries < 0) throw Error(Errc::InvalidInput, "max_parse_retries must be >= 0");
  if (plan_retry_budget < 1) throw Error(Errc::InvalidInput, "plan_retry_budget must be >= 1");
  if (!run_date.ok()) throw Error(Errc::InvalidInput, "run_date is not a valid calendar date");
}

std::string format_date(std::chrono::year_month_day date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

std::chrono::year_month_day parse_date(std::string_view text) {
  text = text::trim(text);
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw Error(Errc::InvalidInput, "expected YYYY-MM-DD, got '" + std::string(text) + "'");
  }
  auto y = text::parse_int(text.substr(0, 4));
  auto m = text::parse_int(text.substr(5, 2));
  auto d = text::parse_int(text.substr(8, 2));
  if (!y || !m || !d) {
    throw Error(Errc::InvalidInput, "expected YYYY-MM-DD, got '" + std::string(text) + "'");
  }
  std::chrono::year_month_day date{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
                                   std::chrono::day{static_cast<unsigned>(*d)}};
  if (!date.ok()) throw Error(Errc::InvalidInput, "invalid calendar date '" + std::string(text) + "'");
  return date;
}

std::string to_string(NodeId id) { return "node-" + std::to_string(id.value); }

std::optional<NodeId> node_id_from_string(std::string_view s) noexcept {
  constexpr std::string_view prefix = "node-";
  if (s.substr(0, prefix.size()) != prefix) return std::nullopt;
  auto n = text::parse_int(s.substr(prefix.size()));
  if (!n || *n < 1) return std::nullopt;
  return NodeId{static_cast<std::uint32_t>(*n)};
}

std::string_view to_string(NodeOrigin origin) noexcept {
  switch (origin) {
    case NodeOrigin::Root: return "Root";
    case NodeOrigin::Breadth: return "Breadth";
    case NodeOrigin::Depth: return "Depth";
  }
  return "Root";
}

std::string_view to_string(NodeStatus status) noexcept {
  switch (status) {
    case NodeStatus::Pending: return "Pending";
    case NodeStatus::Answered: return "Answered";
    case NodeStatus::Expanded: return "Expanded";
    case NodeStatus::Terminal: return "Terminal";
    case NodeStatus::Failed: return "Failed";
  }
  return "Pending";
}

std::optional<NodeOrigin> node_origin_from_string(std::string_view s) noexcept {
  for (auto o : {NodeOrigin::Root, NodeOrigin::Breadth, NodeOrigin::Depth}) {
    if (to_string(o) == s) return o;
  }
  return std::nullopt;
}

std::optional<NodeStatus> node_status_from_string(std::string_view s) noexcept {
  for (auto st : {NodeStatus::Pending, NodeStatus::Answered, NodeStatus::Expanded,
                  NodeStatus::Terminal, NodeStatus::Failed}) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

AnalysisTree AnalysisTree::create(std::string root_query) {
  if (text::is_blank(root_query)) throw Error(Errc::InvalidInput, "root query is empty");
  AnalysisTree tree;
  AnalysisNode root;
  root.id = NodeId{1};
  root.layer = 1;
  root.origin = NodeOrigin::Root;
  root.query = std::move(root_query);
  tree.nodes_.push_back(std::move(root));
  return tree;
}

AnalysisNode& AnalysisTree::mutable_node(NodeId id) {
  if (id.value == 0 || id.value > nodes_.size()) {
    throw Error(Errc::UnknownParent, "no node " + to_string(id));
  }
  return nodes_[id.value - 1];
}

const AnalysisNode& AnalysisTree::node(NodeId id) const {
  if (id.value == 0 || id.value > nodes_.size()) {
    throw Error(Errc::InvalidInput, "no node " + to_string(id));
  }
  return nodes_[id.value - 1];
}

NodeId AnalysisTree::add_child(NodeId parent, std::string query, NodeOrigin origin,
                               const RunConfig& config) {
  if (origin == NodeOrigin::Root) throw Error(Errc::InvalidInput, "child origin cannot be Root");
  if (text::is_blank(query)) throw Error(Errc::InvalidInput, "child query is empty");
  auto& p = mutable_node(parent);
  if (p.status != NodeStatus::Answered && p.status != NodeStatus::Expanded) {
    throw Error(Errc::ParentNotAnswered,
                to_string(parent) + " is " + std::string(to_string(p.status)));
  }
  if (nodes_.size() >= static_cast<std::size_t>(config.max_nodes)) {
    throw Error(Errc::BudgetExceeded,
                "node budget of " + std::to_string(config.max_nodes) + " exhausted");
  }
  if (p.layer + 1 > config.max_layer) {
    throw Error(Errc::BudgetExceeded, "layer " + std::to_string(p.layer + 1) +
                                          " exceeds max_layer " + std::to_string(config.max_layer));
  }
  AnalysisNode child;
  child.id = NodeId{static_cast<std::uint32_t>(nodes_.size() + 1)};
  child.layer = p.layer + 1;
  child.parent = parent;
  child.origin = origin;
  child.query = std::move(query);
  p.children.push_back(child.id);
  p.status = NodeStatus::Expanded;
  auto id = child.id;
  nodes_.push_back(std::move(child));
  return id;
}

void AnalysisTree::set_answer(NodeId id, NodeAnswer answer) {
  auto& n = mutable_node(id);
  n.answer = std::move(answer);
  n.status = NodeStatus::Answered;
  n.failure.clear();
}

void AnalysisTree::mark_failed(NodeId id, std::string reason) {
  auto& n = mutable_node(id);
  n.status = NodeStatus::Failed;
  n.failure = std::move(reason);
}

void AnalysisTree::mark_terminal(NodeId id) {
  auto& n = mutable_node(id);
  if (n.status != NodeStatus::Answered) {
    throw Error(Errc::InvalidInput, "only Answered nodes can become Terminal");
  }
  n.status = NodeStatus::Terminal;
}

void AnalysisTree::record_expansion(NodeOrigin kind) {
  if (kind == NodeOrigin::Breadth) {
    ++breadth_expansions_;
  } else if (kind == NodeOrigin::Depth) {
    ++depth_expansions_;
  } else {
    throw Error(Errc::InvalidInput, "Root is not an expansion kind");
  }
}

std::vector<NodeId> AnalysisTree::creation_order() const {
  std::vector<NodeId> ids;
  ids.reserve(nodes_.size());
  for (const auto& n : nodes_) ids.push_back(n.id);
  return ids;
}

std::vector<NodeId> AnalysisTree::frontier() const {
  std::vector<NodeId> ids;
  for (const auto& n : nodes_) {
    if (n.status == NodeStatus::Answered) ids.push_back(n.id);
  }
  return ids;
}

int AnalysisTree::max_depth() const noexcept {
  int depth = 0;
  for (const auto& n : nodes_) depth = std::max(depth, n.layer);
  return depth;
}

std::vector<std::string> AnalysisTree::structural_problems() const {
  std::vector<std::string> problems;
  if (nodes_.empty()) {
    problems.emplace_back("tree has no nodes");
    return problems;
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    const auto label = to_string(n.id);
    if (n.id.value != i + 1) problems.push_back(label + ": id out of creation order");
    if (i == 0) {
      if (n.parent || n.layer != 1 || n.origin != NodeOrigin::Root) {
        problems.push_back(label + ": root must be layer 1, origin Root, no parent");
      }
    } else {
      if (!n.parent) {
        problems.push_back(label + ": second root");
        continue;
      }
      if (n.origin == NodeOrigin::Root) problems.push_back(label + ": non-root with Root origin");
      // Parents must precede children, which also rules out cycles.
      if (n.parent->value == 0 || n.parent->value >= n.id.value) {
        problems.push_back(label + ": parent does not precede child");
        continue;
      }
      const auto& p = nodes_[n.parent->value - 1];
      if (n.layer != p.layer + 1) problems.push_back(label + ": layer != parent layer + 1");
      if (std::find(p.children.begin(), p.children.end(), n.id) == p.children.end()) {
        problems.push_back(label + ": missing from parent's child list");
      }
    }
    for (auto c : n.children) {
      if (c.value == 0 || c.value > nodes_.size() || nodes_[c.value - 1].parent != n.id) {
        problems.push_back(label + ": child list names " + to_string(c) + " which is not its child");
      }
    }
    if (n.status == NodeStatus::Expanded && n.children.empty()) {
      problems.push_back(label + ": Expanded without children");
    }
    if ((n.status == NodeStatus::Terminal || n.status == NodeStatus::Failed) && !n.children.empty()) {
      problems.push_back(label + ": leaf status with children");
    }
    const bool answered = n.status == NodeStatus::Answered || n.status == NodeStatus::Expanded ||
                          n.status == NodeStatus::Terminal;
    if (answered && !n.answer) problems.push_back(label + ": answered status without answer");
  }
  return problems;
}

AnalysisTree AnalysisTree::restore(std::vector<AnalysisNode> nodes, int breadth_expansions,
                                   int depth_expansions) {
  AnalysisTree tree;
  tree.nodes_ = std::move(nodes);
  tree.breadth_expansions_ = breadth_expansions;
  tree.depth_expansions_ = depth_expansions;
  auto problems = tree.structural_problems();
  if (breadth_expansions < 0 || depth_expansions < 0) problems.emplace_back("negative counters");
  if (!problems.empty()) {
    throw Error(Errc::MalformedFile, "invalid tree: " + text::join(problems, "; "));
  }
  return tree;
}

std::string_view to_string(TerminationCause cause) noexcept {
  switch (cause) {
    case TerminationCause::None: return "None";
    case TerminationCause::MaxLayerReached: return "MaxLayerReached";
    case TerminationCause::MaxNodesReached: return "MaxNodesReached";
    case TerminationCause::FrontierExhausted: return "FrontierExhausted";
  }
  return "None";
}

std::optional<TerminationCause> termination_cause_from_string(std::string_view s) noexcept {
  for (auto c : {TerminationCause::None, TerminationCause::MaxLayerReached,
                 TerminationCause::MaxNodesReached, TerminationCause::FrontierExhausted}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

TerminationStatus check_termination(const AnalysisTree& tree, const RunConfig& config,
                                    std::span<const NodeId> frontier) {
  if (tree.size() >= static_cast<std::size_t>(config.max_nodes)) {
    return {true, TerminationCause::MaxNodesReached};
  }
  if (!frontier.empty() && std::all_of(frontier.begin(), frontier.end(), [&](NodeId id) {
        return tree.node(id).layer >= config.max_layer;
      })) {
    return {true, TerminationCause::MaxLayerReached};
  }
  if (frontier.empty()) return {true, TerminationCause::FrontierExhausted};
  return {false, TerminationCause::None};
}

namespace {
std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  return out;
}
}  // namespace

std::string to_dot(const AnalysisTree& tree) {
  std::ostringstream out;
  out << "digraph analysis {\n  rankdir=TB;\n  node [shape=box];\n";
  for (const auto& n : tree.nodes()) {
    out << "  \"" << to_string(n.id) << "\" [label=\"" << to_string(n.id) << "\\nL" << n.layer
        << " " << to_string(n.origin) << " (" << to_string(n.status) << ")\\n"
        << dot_escape(n.query) << "\"];\n";
  }
  for (const auto& n : tree.nodes()) {
    if (n.parent) out << "  \"" << to_string(*n.parent) << "\" -> \"" << to_string(n.id) << "\";\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace deot
