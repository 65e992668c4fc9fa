#include "deot/engine.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "deot/text.hpp"

namespace deot {

namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw Error(Errc::MalformedModelOutput, what);
}

// Returns the key a line starts with, if any, and its value.
std::optional<std::pair<std::string_view, std::string_view>> keyed_line(
    std::string_view line, std::initializer_list<std::string_view> keys) {
  for (auto k : keys) {
    if (auto v = text::field_value(line, k)) return std::pair{k, *v};
  }
  return std::nullopt;
}

using Fields = std::map<std::string_view, std::string>;

void put_field(Fields& fields, std::string_view key, std::string_view value, std::string_view what) {
  if (fields.contains(key)) malformed(std::string(what) + " repeats " + std::string(key));
  fields.emplace(key, std::string(value));
}

const std::string& required(const Fields& fields, std::string_view key, std::string_view what) {
  auto it = fields.find(key);
  if (it == fields.end()) malformed(std::string(what) + " lacks " + std::string(key));
  if (text::is_blank(it->second)) malformed(std::string(what) + " has an empty " + std::string(key));
  return it->second;
}

Priority required_priority(const Fields& fields, std::string_view what) {
  auto p = priority_from_string(required(fields, "Priority", what));
  if (!p) malformed(std::string(what) + " priority must be HIGH, MEDIUM or LOW");
  return *p;
}

}  // namespace

std::string_view to_string(Priority p) noexcept {
  switch (p) {
    case Priority::High: return "HIGH";
    case Priority::Medium: return "MEDIUM";
    case Priority::Low: return "LOW";
  }
  return "?";
}

std::optional<Priority> priority_from_string(std::string_view s) noexcept {
  s = text::trim(s);
  if (s == "HIGH") return Priority::High;
  if (s == "MEDIUM") return Priority::Medium;
  if (s == "LOW") return Priority::Low;
  return std::nullopt;
}

std::string_view to_string(ExpansionKind k) noexcept {
  return k == ExpansionKind::Breadth ? "BREADTH" : "DEPTH";
}

void EngineContext::validate() const {
  if (text::is_blank(original_query) || text::is_blank(further_query)) {
    throw Error(Errc::InvalidInput, "engine context needs both queries");
  }
  if (current_layer < 1 || max_layer < 1 || current_layer > max_layer) {
    throw Error(Errc::InvalidInput, "engine context layer out of range");
  }
  if (text::is_blank(content)) throw Error(Errc::InvalidInput, "engine context has no content");
}

ControllerDecision parse_controller_decision(std::string_view completion) {
  constexpr std::string_view what = "controller decision";
  Fields fields;
  for (auto line : text::split_lines(completion)) {
    if (auto kv = keyed_line(line, {"Decision", "Reasoning", "Layer"})) put_field(fields, kv->first, kv->second, what);
  }
  ControllerDecision d;
  const auto& token = required(fields, "Decision", what);
  if (token == "BREADTH") {
    d.decision = ExpansionKind::Breadth;
  } else if (token == "DEPTH") {
    d.decision = ExpansionKind::Depth;
  } else {
    malformed("decision must be BREADTH or DEPTH, got \"" + token + "\"");
  }
  d.reasoning = required(fields, "Reasoning", what);
  auto layer = text::parse_int(required(fields, "Layer", what));
  if (!layer || *layer < 1) malformed("controller layer must be a positive integer");
  d.layer = *layer;
  return d;
}

std::vector<BreadthAspect> parse_breadth_aspects(std::string_view completion) {
  constexpr std::string_view what = "breadth aspect";
  std::vector<Fields> blocks;
  for (auto line : text::split_lines(completion)) {
    auto kv = keyed_line(line, {"Aspect", "Category", "Reasoning", "Query", "Priority"});
    if (!kv) continue;
    if (kv->first == "Aspect") {
      blocks.emplace_back();
    } else if (blocks.empty()) {
      malformed(std::string(kv->first) + " appears before any Aspect line");
    }
    put_field(blocks.back(), kv->first, kv->second, what);
  }
  if (blocks.empty()) malformed("no aspects found");
  std::vector<BreadthAspect> out;
  for (const auto& f : blocks) {
    out.push_back({required(f, "Aspect", what), required(f, "Category", what), required(f, "Reasoning", what),
                   required(f, "Query", what), required_priority(f, what)});
  }
  return out;
}

DepthQuestion parse_depth_question(std::string_view completion) {
  constexpr std::string_view what = "depth question";
  Fields fields;
  for (auto line : text::split_lines(completion)) {
    if (auto kv = keyed_line(line, {"Question", "Reasoning", "Priority"})) put_field(fields, kv->first, kv->second, what);
  }
  return {required(fields, "Question", what), required(fields, "Reasoning", what), required_priority(fields, what)};
}

std::string format_controller_decision(const ControllerDecision& d) {
  return "Decision: " + std::string(to_string(d.decision)) + "\nReasoning: " + d.reasoning +
         "\nLayer: " + std::to_string(d.layer);
}

std::string format_breadth_aspects(const std::vector<BreadthAspect>& aspects) {
  std::string out;
  for (const auto& a : aspects) {
    if (!out.empty()) out += "\n\n";
    out += "Aspect: " + a.aspect + "\nCategory: " + a.category + "\nReasoning: " + a.reasoning +
           "\nQuery: " + a.query + "\nPriority: " + std::string(to_string(a.priority));
  }
  return out;
}

std::string format_depth_question(const DepthQuestion& q) {
  return "Question: " + q.question + "\nReasoning: " + q.reasoning + "\nPriority: " +
         std::string(to_string(q.priority));
}

std::vector<BreadthAspect> select_aspects(std::vector<BreadthAspect> aspects, int max_aspects,
                                          std::vector<std::string>& warnings) {
  if (max_aspects < 1) throw Error(Errc::InvalidInput, "max_aspects must be >= 1");
  std::vector<BreadthAspect> unique;
  std::set<std::string> seen;
  for (auto& a : aspects) {
    if (!seen.insert(text::to_lower(text::collapse_whitespace(a.query))).second) {
      warnings.push_back("dropped duplicate aspect query \"" + a.query + "\"");
      continue;
    }
    unique.push_back(std::move(a));
  }
  std::stable_sort(unique.begin(), unique.end(),
                   [](const BreadthAspect& x, const BreadthAspect& y) { return x.priority < y.priority; });
  auto cap = static_cast<std::size_t>(max_aspects);
  if (unique.size() > cap) {
    warnings.push_back("breadth engine proposed " + std::to_string(unique.size()) + " aspects; kept " +
                       std::to_string(cap));
    unique.resize(cap);
  }
  return unique;
}

ControllerDecision Engine::decide(const EngineContext& ec) const {
  ec.validate();
  auto d = call_parsed(ctx_, "engine.controller",
                       {{"original_query", ec.original_query},
                        {"further_query", ec.further_query},
                        {"current_layer", std::to_string(ec.current_layer)},
                        {"max_layer", std::to_string(ec.max_layer)},
                        {"content", ec.content}},
                       [](const std::string& c) { return parse_controller_decision(c); });
  if (d.layer != ec.current_layer) {
    ctx_.warn("controller reported layer " + std::to_string(d.layer) + " at layer " +
              std::to_string(ec.current_layer));
    d.layer = ec.current_layer;
  }
  return d;
}

std::vector<BreadthAspect> Engine::expand_breadth(const EngineContext& ec, int max_aspects) const {
  ec.validate();
  if (max_aspects < 1) throw Error(Errc::InvalidInput, "max_aspects must be >= 1");
  auto aspects = call_parsed(ctx_, "engine.breadth",
                             {{"original_query", ec.original_query},
                              {"content", ec.content},
                              {"max_aspects", std::to_string(max_aspects)}},
                             [](const std::string& c) { return parse_breadth_aspects(c); });
  std::vector<std::string> warnings;
  auto selected = select_aspects(std::move(aspects), max_aspects, warnings);
  for (auto& w : warnings) ctx_.warn(std::move(w));
  return selected;
}

DepthQuestion Engine::expand_depth(const EngineContext& ec) const {
  ec.validate();
  return call_parsed(ctx_, "engine.depth", {{"original_query", ec.original_query}, {"content", ec.content}},
                     [](const std::string& c) { return parse_depth_question(c); });
}

}  // namespace deot
