#pragma once

#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "deot/backend.hpp"
#include "deot/core.hpp"
#include "deot/prompts.hpp"

namespace deot {

/// Thread-safe collection of non-fatal problems noticed during a run.
class RunLog {
 public:
  void warn(std::string message);
  std::vector<std::string> warnings() const;

 private:
  mutable std::mutex mutex_;
  std::vector<std::string> warnings_;
};

/// What a model-backed component needs to issue one prompt.
struct ModelContext {
  Backend& backend;
  const TemplateStore& templates;
  const RunConfig& config;
  RunLog* log = nullptr;

  /// Renders `template_id` and sends it tagged with that id at the configured
  /// temperature. `user_suffix` is appended to the rendered user prompt.
  std::string call(std::string_view template_id, const Bindings& bindings,
                   std::string_view user_suffix = {}) const;
  void warn(std::string message) const;
};

/// Calls the model and parses the reply. A MalformedModelOutput reply is
/// re-requested up to max_parse_retries times with the parse error appended.
template <typename Parse>
auto call_parsed(const ModelContext& ctx, std::string_view template_id, const Bindings& bindings,
                 Parse&& parse) -> decltype(parse(std::string{})) {
  std::string note;
  for (int attempt = 0;; ++attempt) {
    auto completion = ctx.call(template_id, bindings, note);
    try {
      return parse(completion);
    } catch (const Error& e) {
      if (e.code() != Errc::MalformedModelOutput || attempt >= ctx.config.max_parse_retries) throw;
      note = "\n\nYour previous reply could not be used (" + e.detail() +
             "). Answer again using exactly the required format.";
    }
  }
}

}  // namespace deot
