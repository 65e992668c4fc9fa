#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "deot/backend.hpp"
#include "deot/core.hpp"
#include "deot/prompts.hpp"

namespace deot {

enum class InputContract { FreeText, QueryCount };
enum class BackendRole { Reasoning, Retrieval };

struct ToolDescriptor {
  std::string name;
  std::string description;  // one line in the planner's agent list
  std::string input_hint;   // optional second line, e.g. the "query,number" format
  std::string template_id;
  std::string input_placeholder;  // FreeText tools bind their input here
  InputContract input_contract = InputContract::FreeText;
  BackendRole backend_role = BackendRole::Reasoning;

  bool operator==(const ToolDescriptor&) const = default;
};

class ToolRegistry {
 public:
  /// news_search, event_extractor, history_analyzer, info_search, llm.
  static ToolRegistry defaults();

  /// Throws Error(InvalidInput) on a duplicate or empty name.
  void add(ToolDescriptor tool);
  const ToolDescriptor* find(std::string_view name) const noexcept;
  const std::vector<ToolDescriptor>& tools() const noexcept { return tools_; }

 private:
  std::vector<ToolDescriptor> tools_;
};

/// The agent list shown to the planner, one entry per tool in registry order.
std::string describe_tools(const ToolRegistry& registry);

struct NewsQuery {
  std::string query;
  int needed_count = 1;  // 1..5

  bool operator==(const NewsQuery&) const = default;
};

/// "query,number" split on the last comma. Throws Error(MalformedToolInput).
NewsQuery parse_news_input(std::string_view input);
std::string format_news_input(const NewsQuery& q);

struct ToolOutput {
  std::string tool;
  std::string text;
  std::string request_tag;

  bool operator==(const ToolOutput&) const = default;
};

class Toolbox {
 public:
  Toolbox(const ToolRegistry& registry, BackendSet backends, const TemplateStore& templates,
          const RunConfig& config)
      : registry_(registry), backends_(std::move(backends)), templates_(templates), config_(config) {}

  /// Throws UnknownTool, MalformedToolInput, or whatever the backend raises.
  ToolOutput invoke(std::string_view name, std::string_view input) const;

  const ToolRegistry& registry() const noexcept { return registry_; }

 private:
  const ToolRegistry& registry_;
  BackendSet backends_;
  const TemplateStore& templates_;
  const RunConfig& config_;
};

}  // namespace deot
