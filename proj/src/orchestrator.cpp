#include "deot/orchestrator.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <set>

#include "deot/engine.hpp"
#include "deot/executor.hpp"
#include "deot/planner.hpp"
#include "deot/text.hpp"

namespace deot {

namespace {

std::string utc_timestamp(bool deterministic) {
  if (deterministic) return "1970-01-01T00:00:00Z";
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string successful_sources(const std::vector<ExecutionRecord>& records) {
  std::vector<std::string> names;
  std::set<std::string> seen;
  for (const auto& r : records) {
    if (r.status == TaskStatus::Success && seen.insert(r.task_name).second) names.push_back(r.task_name);
  }
  return text::join(names, ", ");
}

std::string entry_label(const ValidationEntry& e) {
  return std::string(to_string(e.status)) + " (" + std::string(to_string(e.confidence)) + ")";
}

}  // namespace

Metrics metrics_of(const AnalysisTree& tree) {
  return {static_cast<int>(tree.size()), tree.max_depth(), tree.breadth_expansions(), tree.depth_expansions()};
}

bool RunRecord::succeeded() const {
  return tree.size() > 0 && tree.root().status != NodeStatus::Failed && tree.root().answer.has_value();
}

Orchestrator::Orchestrator(BackendSet backends, const TemplateStore& templates, const ToolRegistry& registry,
                           RunConfig config, OrchestratorOptions options)
    : backends_(std::move(backends)),
      templates_(templates),
      registry_(registry),
      config_(config),
      options_(std::move(options)) {
  config_.validate();
  if (!backends_.reasoning || !backends_.retrieval) {
    throw Error(Errc::ConfigError, "both reasoning and retrieval backends are required");
  }
}

ModelContext Orchestrator::model() const { return {*backends_.reasoning, templates_, config_, &log_}; }

NodeAnswer Orchestrator::solve_node(std::string_view query) const {
  try {
    auto ctx = model();
    Planner planner(ctx, registry_);
    auto plan = planner.decompose(query);

    Toolbox toolbox(registry_, backends_, templates_, config_);
    auto records = Executor(toolbox, options_.parallel_tasks).execute(plan);
    bool any_success = false;
    for (const auto& r : records) any_success = any_success || r.status == TaskStatus::Success;
    if (!any_success) throw Error(Errc::NodeFailed, "no task of the plan succeeded");

    Summarizer summarizer(ctx);
    auto content = format_task_results(records);
    auto source = successful_sources(records);
    NodeAnswer answer;
    answer.summary = summarizer.summarize(query, records);
    answer.validation = summarizer.fact_check(query, source, content, answer.summary);

    const auto& sv = answer.validation.summary_validation;
    if (sv.status == Verdict::Invalid && sv.confidence == Confidence::High) {
      answer.summary = summarizer.summarize(query, records, sv.issues);
      answer.validation = summarizer.fact_check(query, source, content, answer.summary);
    }
    for (const auto& tv : answer.validation.task_validations) {
      if (tv.status == Verdict::Invalid) answer.flags.push_back("task " + tv.task_id + " " + entry_label(tv));
    }
    if (answer.validation.summary_validation.status == Verdict::Invalid) {
      answer.flags.push_back("summary " + entry_label(answer.validation.summary_validation));
    }
    answer.raw_task_records = std::move(records);
    return answer;
  } catch (const Error& e) {
    if (e.code() == Errc::NodeFailed) throw;
    throw Error(Errc::NodeFailed, e.what());
  }
}

void Orchestrator::solve_into(AnalysisTree& tree, NodeId id) const {
  try {
    tree.set_answer(id, solve_node(tree.node(id).query));
  } catch (const Error& e) {
    if (e.code() != Errc::NodeFailed) throw;
    log_.warn(to_string(id) + " failed: " + e.detail());
    tree.mark_failed(id, e.detail());
  }
}

void Orchestrator::expand(AnalysisTree& tree, NodeId id, const std::string& original_query) {
  const auto& node = tree.node(id);
  EngineContext ec{original_query, node.query, node.layer, config_.max_layer, format_summary(node.answer->summary)};
  Engine engine(model());
  std::vector<NodeId> children;
  try {
    auto decision = engine.decide(ec);
    if (decision.decision == ExpansionKind::Breadth) {
      auto aspects = engine.expand_breadth(ec, config_.max_aspects);
      tree.record_expansion(NodeOrigin::Breadth);
      for (std::size_t i = 0; i < aspects.size(); ++i) {
        if (tree.size() >= static_cast<std::size_t>(config_.max_nodes)) {
          log_.warn("node budget reached; dropped " + std::to_string(aspects.size() - i) + " aspect(s) of " +
                    to_string(id));
          break;
        }
        children.push_back(tree.add_child(id, aspects[i].query, NodeOrigin::Breadth, config_));
      }
    } else {
      auto question = engine.expand_depth(ec);
      tree.record_expansion(NodeOrigin::Depth);
      children.push_back(tree.add_child(id, question.question, NodeOrigin::Depth, config_));
    }
  } catch (const Error& e) {
    if (e.code() == Errc::MalformedModelOutput || e.code() == Errc::TransportError ||
        e.code() == Errc::EmptyCompletion || e.code() == Errc::ScriptExhausted) {
      log_.warn("expansion of " + to_string(id) + " failed: " + std::string(e.what()));
      tree.mark_terminal(id);
      return;
    }
    throw;
  }
  for (auto child : children) solve_into(tree, child);
}

RunRecord Orchestrator::run(std::string_view raw_query) {
  if (text::is_blank(raw_query)) throw Error(Errc::InvalidInput, "query is empty");
  RunRecord record;
  record.config = config_;
  record.root_query = std::string(raw_query);
  record.started_at = utc_timestamp(options_.deterministic);
  if (!options_.run_id.empty()) {
    record.run_id = options_.run_id;
  } else if (options_.deterministic) {
    record.run_id = "run-" + hex64(text::fnv1a(record.root_query + "\n" + format_date(config_.run_date)));
  } else {
    record.run_id = "run-" + hex64(text::fnv1a(record.root_query + record.started_at +
                                               std::to_string(std::chrono::steady_clock::now().time_since_epoch().count())));
  }

  record.optimized = Prompter(model()).optimize_query(raw_query);
  auto& tree = record.tree;
  tree = AnalysisTree::create(record.optimized.optimized_query);
  solve_into(tree, tree.root().id);

  if (tree.root().status == NodeStatus::Failed) {
    record.termination = {true, TerminationCause::FrontierExhausted};
  } else {
    for (;;) {
      auto frontier = tree.frontier();
      auto status = check_termination(tree, config_, frontier);
      if (status.should_stop) {
        record.termination = status;
        break;
      }
      for (auto id : frontier) {
        if (tree.node(id).layer < config_.max_layer) {
          expand(tree, id, record.optimized.optimized_query);
          break;
        }
      }
    }
    for (auto id : tree.frontier()) tree.mark_terminal(id);
    record.final_report = final_response(record.optimized.optimized_query, tree);
  }

  record.metrics = metrics_of(tree);
  record.warnings = log_.warnings();
  record.finished_at = utc_timestamp(options_.deterministic);
  return record;
}

std::string format_node_summaries(const AnalysisTree& tree) {
  std::string out;
  for (const auto& n : tree.nodes()) {
    if (!n.answer) continue;
    if (!out.empty()) out += "\n\n";
    out += "[" + to_string(n.id) + "] Layer " + std::to_string(n.layer) + " | " + std::string(to_string(n.origin)) +
           " | Query: " + n.query + "\n" + format_summary(n.answer->summary);
  }
  return out;
}

std::string Orchestrator::final_response(std::string_view original_query, const AnalysisTree& tree) const {
  auto summaries = format_node_summaries(tree);
  if (summaries.empty()) throw Error(Errc::InvalidInput, "no answered node to report on");
  auto m = metrics_of(tree);
  return model().call("response.final", {{"original_query", std::string(original_query)},
                                         {"node_summaries", summaries},
                                         {"total_nodes", std::to_string(m.total_nodes)},
                                         {"max_depth", std::to_string(m.max_depth)},
                                         {"breadth_analyses", std::to_string(m.breadth_analyses)},
                                         {"depth_analyses", std::to_string(m.depth_analyses)}});
}

}  // namespace deot
