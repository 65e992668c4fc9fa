#include "deot/planner.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "deot/text.hpp"
#include "json.hpp"

namespace deot {

namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw Error(Errc::MalformedModelOutput, what);
}

std::string string_field(const nlohmann::json& obj, const char* key) {
  if (!obj.contains(key)) malformed(std::string("task lacks field ") + key);
  const auto& v = obj.at(key);
  if (!v.is_string()) malformed(std::string("task field ") + key + " must be a string");
  return v.get<std::string>();
}

}  // namespace

TaskPlan parse_task_plan(std::string_view completion) {
  auto body = text::extract_balanced(text::strip_code_fences(completion), '[');
  if (!body) malformed("no JSON array in planner output");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(*body);
  } catch (const nlohmann::json::exception& e) {
    malformed(std::string("planner output is not valid JSON: ") + e.what());
  }
  TaskPlan plan;
  for (const auto& item : doc) {
    if (!item.is_object()) malformed("task plan entries must be objects");
    TaskSpec t;
    t.task = string_field(item, "task");
    t.id = string_field(item, "id");
    t.name = string_field(item, "name");
    t.input = string_field(item, "input");
    t.reason = string_field(item, "reason");
    if (!item.contains("dep")) malformed("task lacks field dep");
    const auto& dep = item.at("dep");
    if (!dep.is_array()) malformed("task field dep must be an array");
    for (const auto& d : dep) {
      if (!d.is_string()) malformed("dependency ids must be strings");
      t.dep.push_back(d.get<std::string>());
    }
    plan.tasks.push_back(std::move(t));
  }
  return plan;
}

std::string format_task_plan(const TaskPlan& plan) {
  auto doc = nlohmann::ordered_json::array();
  for (const auto& t : plan.tasks) {
    doc.push_back({{"task", t.task},
                   {"id", t.id},
                   {"name", t.name},
                   {"input", t.input},
                   {"reason", t.reason},
                   {"dep", t.dep}});
  }
  return doc.dump(2);
}

std::string_view to_string(ViolationKind kind) noexcept {
  switch (kind) {
    case ViolationKind::TaskCount: return "TaskCount";
    case ViolationKind::EmptyId: return "EmptyId";
    case ViolationKind::DuplicateId: return "DuplicateId";
    case ViolationKind::EmptyInput: return "EmptyInput";
    case ViolationKind::UnknownTool: return "UnknownTool";
    case ViolationKind::DanglingDependency: return "DanglingDependency";
    case ViolationKind::CyclicDependency: return "CyclicDependency";
    case ViolationKind::NewsInputFormat: return "NewsInputFormat";
  }
  return "?";
}

std::vector<Violation> check_format(const TaskPlan& plan, const ToolRegistry& registry) {
  std::vector<Violation> out;
  auto n = plan.tasks.size();
  if (n < 1 || n > 3) {
    out.push_back({ViolationKind::TaskCount, "",
                   "plan has " + std::to_string(n) + " tasks; 1 to 3 are required"});
  }

  std::map<std::string, int> id_count;
  for (const auto& t : plan.tasks) ++id_count[t.id];

  for (const auto& t : plan.tasks) {
    if (text::is_blank(t.id)) out.push_back({ViolationKind::EmptyId, t.id, "task id is empty"});
    if (text::is_blank(t.input)) out.push_back({ViolationKind::EmptyInput, t.id, "input is empty"});
    const auto* tool = registry.find(t.name);
    if (tool == nullptr) {
      out.push_back({ViolationKind::UnknownTool, t.id, "unknown agent \"" + t.name + "\""});
    } else if (tool->input_contract == InputContract::QueryCount && !text::is_blank(t.input)) {
      try {
        parse_news_input(t.input);
      } catch (const Error& e) {
        out.push_back({ViolationKind::NewsInputFormat, t.id, e.detail()});
      }
    }
    for (const auto& d : t.dep) {
      if (!id_count.contains(d)) {
        out.push_back({ViolationKind::DanglingDependency, t.id, "depends on unknown task \"" + d + "\""});
      }
    }
  }
  for (const auto& [id, count] : id_count) {
    if (count > 1 && !text::is_blank(id)) {
      out.push_back({ViolationKind::DuplicateId, id, "task id used " + std::to_string(count) + " times"});
    }
  }

  // Tasks that never become ready under Kahn elimination sit on or behind a cycle.
  std::map<std::string, std::set<std::string>> pending;
  for (const auto& t : plan.tasks) {
    auto& deps = pending[t.id];
    for (const auto& d : t.dep) {
      if (id_count.contains(d)) deps.insert(d);
    }
  }
  bool progressed = true;
  while (progressed) {
    progressed = false;
    for (auto it = pending.begin(); it != pending.end();) {
      if (it->second.empty()) {
        auto done = it->first;
        it = pending.erase(it);
        for (auto& [id, deps] : pending) deps.erase(done);
        progressed = true;
      } else {
        ++it;
      }
    }
  }
  for (const auto& [id, deps] : pending) {
    out.push_back({ViolationKind::CyclicDependency, id, "dependency cycle through this task"});
  }

  std::sort(out.begin(), out.end());
  return out;
}

std::string format_violations(const std::vector<Violation>& violations) {
  std::string out = "The plan violates the format rules:";
  for (const auto& v : violations) {
    out += "\n- ";
    if (!v.task_id.empty()) out += v.task_id + ": ";
    out += v.message;
  }
  return out;
}

PlanVerdict interpret_validation(std::string_view completion) {
  auto normalize = [](std::string_view s) {
    auto out = text::to_lower(text::collapse_whitespace(s));
    return out;
  };
  auto sentinel = normalize(kPlanAcceptedSentinel);
  sentinel.pop_back();  // the trailing period is optional
  if (normalize(completion).find(sentinel) != std::string::npos) {
    return {true, std::string(kPlanAcceptedSentinel)};
  }
  return {false, std::string(text::trim(completion))};
}

TaskPlan Planner::checked(const std::string& completion) const {
  auto plan = parse_task_plan(completion);
  auto violations = check_format(plan, registry_);
  if (!violations.empty()) throw Error(Errc::PlanRejected, format_violations(violations));
  return plan;
}

TaskPlan Planner::decompose(std::string_view query) const {
  if (text::is_blank(query)) throw Error(Errc::InvalidInput, "query is empty");
  auto agents = describe_tools(registry_);
  std::string feedback;
  for (int call = 0; call < ctx_.config.plan_retry_budget; ++call) {
    try {
      auto plan = call == 0 ? checked(ctx_.call("planner.decompose",
                                                {{"available_agents", agents},
                                                 {"input", std::string(query)}}))
                            : regenerate(query, feedback);
      auto verdict = validate_plan(query, plan);
      if (verdict.passed) return plan;
      feedback = verdict.feedback;
    } catch (const Error& e) {
      if (e.code() == Errc::MalformedModelOutput) {
        feedback = "The previous plan could not be parsed: " + e.detail();
      } else if (e.code() == Errc::PlanRejected) {
        feedback = e.detail();
      } else {
        throw;
      }
    }
  }
  throw Error(Errc::PlanRejected, feedback);
}

PlanVerdict Planner::validate_plan(std::string_view query, const TaskPlan& plan) const {
  auto completion = ctx_.call("planner.validate", {{"original_query", std::string(query)},
                                                   {"task_plan", format_task_plan(plan)}});
  if (text::is_blank(completion)) malformed("plan validator returned nothing");
  return interpret_validation(completion);
}

TaskPlan Planner::regenerate(std::string_view query, std::string_view feedback) const {
  if (text::is_blank(feedback)) throw Error(Errc::InvalidInput, "regeneration needs feedback");
  return checked(ctx_.call("planner.retry", {{"available_agents", describe_tools(registry_)},
                                             {"original_query", std::string(query)},
                                             {"feedback", std::string(feedback)}}));
}

}  // namespace deot
