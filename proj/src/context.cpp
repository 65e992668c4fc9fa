#include "deot/context.hpp"

namespace deot {

void RunLog::warn(std::string message) {
  std::lock_guard lock(mutex_);
  warnings_.push_back(std::move(message));
}

std::vector<std::string> RunLog::warnings() const {
  std::lock_guard lock(mutex_);
  return warnings_;
}

std::string ModelContext::call(std::string_view template_id, const Bindings& bindings,
                               std::string_view user_suffix) const {
  auto prompt = templates.get(template_id).render(bindings);
  prompt.user += user_suffix;
  CompletionRequest request{std::move(prompt.system), std::move(prompt.user), config.temperature,
                            std::string(template_id)};
  return backend.complete(request);
}

void ModelContext::warn(std::string message) const {
  if (log != nullptr) log->warn(std::move(message));
}

}  // namespace deot
