#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "deot/context.hpp"

namespace deot {

enum class Priority { High, Medium, Low };  // declaration order is sort order
std::string_view to_string(Priority p) noexcept;
std::optional<Priority> priority_from_string(std::string_view s) noexcept;

enum class ExpansionKind { Breadth, Depth };
std::string_view to_string(ExpansionKind k) noexcept;

struct EngineContext {
  std::string original_query;
  std::string further_query;  // the node's own query
  int current_layer = 1;
  int max_layer = 1;
  std::string content;  // the node's summary as text

  /// Throws Error(InvalidInput).
  void validate() const;
};

struct ControllerDecision {
  ExpansionKind decision = ExpansionKind::Breadth;
  std::string reasoning;
  int layer = 1;

  bool operator==(const ControllerDecision&) const = default;
};

struct BreadthAspect {
  std::string aspect;
  std::string category;
  std::string reasoning;
  std::string query;
  Priority priority = Priority::Medium;

  bool operator==(const BreadthAspect&) const = default;
};

struct DepthQuestion {
  std::string question;
  std::string reasoning;
  Priority priority = Priority::Medium;

  bool operator==(const DepthQuestion&) const = default;
};

// Parsers read "Key: value" lines and ignore surrounding prose. Missing or
// repeated keys and tokens outside the closed sets throw MalformedModelOutput.
ControllerDecision parse_controller_decision(std::string_view completion);
std::vector<BreadthAspect> parse_breadth_aspects(std::string_view completion);
DepthQuestion parse_depth_question(std::string_view completion);

std::string format_controller_decision(const ControllerDecision& d);
std::string format_breadth_aspects(const std::vector<BreadthAspect>& aspects);
std::string format_depth_question(const DepthQuestion& q);

/// Drops repeated queries (compared case- and whitespace-insensitively),
/// orders by priority keeping the model's order within a level, and keeps at
/// most `max_aspects`. Every drop is reported through `warnings`.
std::vector<BreadthAspect> select_aspects(std::vector<BreadthAspect> aspects, int max_aspects,
                                          std::vector<std::string>& warnings);

class Engine {
 public:
  explicit Engine(ModelContext ctx) : ctx_(ctx) {}

  ControllerDecision decide(const EngineContext& ec) const;
  std::vector<BreadthAspect> expand_breadth(const EngineContext& ec, int max_aspects) const;
  DepthQuestion expand_depth(const EngineContext& ec) const;

 private:
  ModelContext ctx_;
};

}  // namespace deot
