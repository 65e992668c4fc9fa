#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace deot {

using Bindings = std::map<std::string, std::string, std::less<>>;

struct RenderedPrompt {
  std::string system;
  std::string user;

  bool operator==(const RenderedPrompt&) const = default;
};

/// Placeholder names in a template body. `{name}` is a placeholder,
/// `{{` and `}}` are literal braces. Throws Error(MalformedTemplate) on any
/// other brace use.
std::set<std::string, std::less<>> scan_placeholders(std::string_view body);

class PromptTemplate {
 public:
  /// Throws Error(MalformedTemplate) when the bodies do not parse or their
  /// placeholders differ from `declared`.
  static PromptTemplate make(std::string id, std::string system_template, std::string user_template,
                             std::set<std::string, std::less<>> declared);
  /// Placeholders taken from the bodies themselves.
  static PromptTemplate make(std::string id, std::string system_template, std::string user_template);

  /// Bindings must cover the placeholders exactly; throws MissingPlaceholder or UnknownPlaceholder.
  RenderedPrompt render(const Bindings& bindings) const;

  const std::string& id() const noexcept { return id_; }
  const std::string& system_template() const noexcept { return system_; }
  const std::string& user_template() const noexcept { return user_; }
  const std::set<std::string, std::less<>>& placeholders() const noexcept { return placeholders_; }

  bool operator==(const PromptTemplate&) const = default;

 private:
  PromptTemplate() = default;

  std::string id_;
  std::string system_;
  std::string user_;
  std::set<std::string, std::less<>> placeholders_;
};

/// Template ids the pipeline depends on.
const std::vector<std::string>& required_template_ids();

/// Immutable-after-load collection of templates keyed by id.
class TemplateStore {
 public:
  /// The bundle compiled into the library.
  static const TemplateStore& defaults();
  /// Full bundle directory (manifest.json plus text files); every required id
  /// must be present or Error(MissingTemplate) lists the absent ones.
  static TemplateStore load_bundle(const std::filesystem::path& dir);
  /// Partial bundle directory whose templates replace those of `base`.
  static TemplateStore load_overrides(const std::filesystem::path& dir, const TemplateStore& base);

  /// Throws Error(MissingTemplate).
  const PromptTemplate& get(std::string_view id) const;
  bool contains(std::string_view id) const;
  std::vector<std::string> ids() const;
  /// Adds or replaces a template (custom tools register theirs this way).
  void put(PromptTemplate tmpl);

 private:
  std::map<std::string, PromptTemplate, std::less<>> templates_;
};

namespace detail {
const std::vector<std::pair<std::string_view, std::string_view>>& embedded_prompt_bundle();
}  // namespace detail

}  // namespace deot
