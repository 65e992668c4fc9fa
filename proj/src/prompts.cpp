#include "deot/prompts.hpp"

#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include "deot/error.hpp"
#include "json.hpp"

namespace deot {

namespace {

bool is_name_start(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }
bool is_name_char(char c) { return is_name_start(c) || (c >= '0' && c <= '9'); }

// Walks a template body, calling on_text for literal runs and on_name for
// placeholders.
template <typename OnText, typename OnName>
void walk(std::string_view body, OnText&& on_text, OnName&& on_name) {
  std::size_t i = 0;
  while (i < body.size()) {
    char c = body[i];
    if (c == '{') {
      if (i + 1 < body.size() && body[i + 1] == '{') {
        on_text(std::string_view("{"));
        i += 2;
        continue;
      }
      std::size_t j = i + 1;
      if (j < body.size() && is_name_start(body[j])) {
        while (j < body.size() && is_name_char(body[j])) ++j;
        if (j < body.size() && body[j] == '}') {
          on_name(body.substr(i + 1, j - i - 1));
          i = j + 1;
          continue;
        }
      }
      throw Error(Errc::MalformedTemplate,
                  "unescaped '{' at offset " + std::to_string(i) + " is not a placeholder");
    }
    if (c == '}') {
      if (i + 1 < body.size() && body[i + 1] == '}') {
        on_text(std::string_view("}"));
        i += 2;
        continue;
      }
      throw Error(Errc::MalformedTemplate, "unescaped '}' at offset " + std::to_string(i));
    }
    std::size_t j = i;
    while (j < body.size() && body[j] != '{' && body[j] != '}') ++j;
    on_text(body.substr(i, j - i));
    i = j;
  }
}

std::string substitute(std::string_view body, const Bindings& bindings) {
  std::string out;
  out.reserve(body.size());
  walk(
      body, [&](std::string_view t) { out.append(t); },
      [&](std::string_view name) { out.append(bindings.find(name)->second); });
  return out;
}

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

std::string strip_trailing_newlines(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

using FileReader = std::function<std::optional<std::string>(const std::string&)>;

std::map<std::string, PromptTemplate, std::less<>> read_bundle(const FileReader& read,
                                                               const std::string& where) {
  auto manifest_text = read("manifest.json");
  if (!manifest_text) throw Error(Errc::MalformedFile, where + ": manifest.json not found");
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(*manifest_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedFile, where + ": manifest.json is not valid JSON: " + e.what());
  }
  if (!manifest.is_object() || manifest.value("schema", "") != "deot.prompts/1") {
    throw Error(Errc::VersionMismatch, where + ": manifest schema must be deot.prompts/1");
  }

  std::map<std::string, PromptTemplate, std::less<>> out;
  try {
    for (const auto& entry : manifest.at("templates")) {
      auto id = entry.at("id").get<std::string>();
      auto load = [&](const char* key) {
        auto file = entry.at(key).get<std::string>();
        auto text = read(file);
        if (!text) throw Error(Errc::MalformedFile, where + ": missing file " + file);
        return strip_trailing_newlines(std::move(*text));
      };
      std::set<std::string, std::less<>> declared;
      for (const auto& p : entry.at("placeholders")) declared.insert(p.get<std::string>());
      auto tmpl = PromptTemplate::make(id, load("system"), load("user"), std::move(declared));
      out.insert_or_assign(id, std::move(tmpl));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedFile, where + ": malformed manifest entry: " + e.what());
  }
  return out;
}

FileReader directory_reader(const std::filesystem::path& dir) {
  return [dir](const std::string& name) -> std::optional<std::string> {
    std::ifstream in(dir / name, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
}

}  // namespace

std::set<std::string, std::less<>> scan_placeholders(std::string_view body) {
  std::set<std::string, std::less<>> names;
  walk(
      body, [](std::string_view) {}, [&](std::string_view name) { names.emplace(name); });
  return names;
}

PromptTemplate PromptTemplate::make(std::string id, std::string system_template,
                                    std::string user_template,
                                    std::set<std::string, std::less<>> declared) {
  auto tmpl = make(std::move(id), std::move(system_template), std::move(user_template));
  if (tmpl.placeholders_ != declared) {
    throw Error(Errc::MalformedTemplate,
                "template " + tmpl.id_ + " declares placeholders that differ from its text");
  }
  return tmpl;
}

PromptTemplate PromptTemplate::make(std::string id, std::string system_template,
                                    std::string user_template) {
  if (id.empty()) throw Error(Errc::MalformedTemplate, "template id is empty");
  PromptTemplate tmpl;
  try {
    tmpl.placeholders_ = scan_placeholders(system_template);
    tmpl.placeholders_.merge(scan_placeholders(user_template));
  } catch (const Error& e) {
    throw Error(Errc::MalformedTemplate, "template " + id + ": " + e.detail());
  }
  tmpl.id_ = std::move(id);
  tmpl.system_ = std::move(system_template);
  tmpl.user_ = std::move(user_template);
  return tmpl;
}

RenderedPrompt PromptTemplate::render(const Bindings& bindings) const {
  std::vector<std::string> missing;
  for (const auto& name : placeholders_) {
    if (!bindings.contains(name)) missing.push_back(name);
  }
  if (!missing.empty()) {
    throw Error(Errc::MissingPlaceholder, id_ + " is missing bindings for " + join_names(missing));
  }
  std::vector<std::string> unknown;
  for (const auto& [name, value] : bindings) {
    if (!placeholders_.contains(name)) unknown.push_back(name);
  }
  if (!unknown.empty()) {
    throw Error(Errc::UnknownPlaceholder, id_ + " has no placeholders named " + join_names(unknown));
  }
  return {substitute(system_, bindings), substitute(user_, bindings)};
}

const std::vector<std::string>& required_template_ids() {
  static const std::vector<std::string> ids = {
      "prompter.optimize",     "prompter.error",        "planner.decompose",
      "planner.retry",         "planner.validate",      "tool.news_search",
      "tool.event_extractor",  "tool.history_analyzer", "tool.reasoning",
      "tool.info_search",      "executor.summarize",    "executor.fact_check",
      "engine.controller",     "engine.breadth",        "engine.depth",
      "response.final",        "eval.system",           "eval.judge",
      "n2q.question",
  };
  return ids;
}

const TemplateStore& TemplateStore::defaults() {
  static const TemplateStore store = [] {
    const auto& files = detail::embedded_prompt_bundle();
    FileReader reader = [&files](const std::string& name) -> std::optional<std::string> {
      for (const auto& [file, content] : files) {
        if (file == name) return std::string(content);
      }
      return std::nullopt;
    };
    TemplateStore s;
    s.templates_ = read_bundle(reader, "embedded bundle");
    return s;
  }();
  return store;
}

TemplateStore TemplateStore::load_bundle(const std::filesystem::path& dir) {
  TemplateStore s;
  s.templates_ = read_bundle(directory_reader(dir), dir.string());
  std::vector<std::string> absent;
  for (const auto& id : required_template_ids()) {
    if (!s.contains(id)) absent.push_back(id);
  }
  if (!absent.empty()) {
    throw Error(Errc::MissingTemplate, "bundle " + dir.string() + " lacks " + join_names(absent));
  }
  return s;
}

TemplateStore TemplateStore::load_overrides(const std::filesystem::path& dir,
                                            const TemplateStore& base) {
  TemplateStore s = base;
  for (auto& [id, tmpl] : read_bundle(directory_reader(dir), dir.string())) {
    s.put(std::move(tmpl));
  }
  return s;
}

const PromptTemplate& TemplateStore::get(std::string_view id) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) {
    throw Error(Errc::MissingTemplate, "no template with id " + std::string(id));
  }
  return it->second;
}

bool TemplateStore::contains(std::string_view id) const { return templates_.find(id) != templates_.end(); }

std::vector<std::string> TemplateStore::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, tmpl] : templates_) out.push_back(id);
  return out;
}

void TemplateStore::put(PromptTemplate tmpl) {
  auto id = tmpl.id();
  templates_.insert_or_assign(std::move(id), std::move(tmpl));
}

}  // namespace deot
