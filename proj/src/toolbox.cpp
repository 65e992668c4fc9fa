#include "deot/toolbox.hpp"

#include "deot/error.hpp"
#include "deot/text.hpp"

namespace deot {

ToolRegistry ToolRegistry::defaults() {
  ToolRegistry r;
  r.add({"news_search", "Search and retrieve news articles and real-time information",
         "Input format: \"query,number\" (e.g. \"Ukraine conflict,5\")", "tool.news_search", "",
         InputContract::QueryCount, BackendRole::Retrieval});
  r.add({"event_extractor", "Extract key events and their relationships from text", "",
         "tool.event_extractor", "text", InputContract::FreeText, BackendRole::Reasoning});
  r.add({"history_analyzer", "Analyze historical patterns and similar cases", "",
         "tool.history_analyzer", "event", InputContract::FreeText, BackendRole::Reasoning});
  r.add({"info_search", "Search for supplementary information", "", "tool.info_search", "query",
         InputContract::FreeText, BackendRole::Retrieval});
  r.add({"llm", "Generate answers using language model reasoning", "", "tool.reasoning", "query",
         InputContract::FreeText, BackendRole::Reasoning});
  return r;
}

void ToolRegistry::add(ToolDescriptor tool) {
  if (text::is_blank(tool.name)) throw Error(Errc::InvalidInput, "tool name is empty");
  if (find(tool.name) != nullptr) {
    throw Error(Errc::InvalidInput, "tool " + tool.name + " is already registered");
  }
  tools_.push_back(std::move(tool));
}

const ToolDescriptor* ToolRegistry::find(std::string_view name) const noexcept {
  for (const auto& t : tools_) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::string describe_tools(const ToolRegistry& registry) {
  std::string out;
  for (const auto& t : registry.tools()) {
    if (!out.empty()) out += '\n';
    out += "- " + t.name + ": " + t.description;
    if (!t.input_hint.empty()) out += "\n  " + t.input_hint;
  }
  return out;
}

NewsQuery parse_news_input(std::string_view input) {
  auto comma = input.rfind(',');
  if (comma == std::string_view::npos) {
    throw Error(Errc::MalformedToolInput, "expected \"query,number\", got \"" + std::string(input) + "\"");
  }
  auto query = text::trim(input.substr(0, comma));
  if (query.empty()) throw Error(Errc::MalformedToolInput, "news query is empty");
  auto count = text::parse_int(input.substr(comma + 1));
  if (!count) {
    throw Error(Errc::MalformedToolInput, "article count in \"" + std::string(input) + "\" is not an integer");
  }
  if (*count < 1 || *count > 5) {
    throw Error(Errc::MalformedToolInput, "article count must be 1-5, got " + std::to_string(*count));
  }
  return {std::string(query), *count};
}

std::string format_news_input(const NewsQuery& q) {
  return q.query + "," + std::to_string(q.needed_count);
}

ToolOutput Toolbox::invoke(std::string_view name, std::string_view input) const {
  const auto* tool = registry_.find(name);
  if (tool == nullptr) throw Error(Errc::UnknownTool, "no tool named " + std::string(name));

  Bindings bindings;
  if (tool->input_contract == InputContract::QueryCount) {
    auto q = parse_news_input(input);
    bindings = {{"needed_count", std::to_string(q.needed_count)}, {"query", q.query}};
  } else {
    if (text::is_blank(input)) throw Error(Errc::MalformedToolInput, tool->name + " input is empty");
    bindings = {{tool->input_placeholder, std::string(input)}};
  }

  auto prompt = templates_.get(tool->template_id).render(bindings);
  auto& backend = tool->backend_role == BackendRole::Retrieval ? backends_.retrieval : backends_.reasoning;
  if (!backend) throw Error(Errc::ConfigError, "no backend configured for tool " + tool->name);
  CompletionRequest request{std::move(prompt.system), std::move(prompt.user), config_.temperature,
                            tool->template_id};
  auto text = backend->complete(request);
  return {tool->name, std::move(text), tool->template_id};
}

}  // namespace deot
