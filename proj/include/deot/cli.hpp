#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "deot/core.hpp"
#include "deot/http_backend.hpp"

namespace deot::cli {

enum class BackendKind { Scripted, Http };

/// Values given on the command line; empty means "not given".
struct Flags {
  std::optional<std::filesystem::path> config;
  std::optional<int> max_layers;
  std::optional<int> max_nodes;
  std::optional<int> max_aspects;
  std::optional<double> temperature;
  std::optional<std::string> run_date;
  std::optional<std::string> backend;
  std::optional<std::filesystem::path> script;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> prompts;
};

/// Effective settings after layering flags over the config file over defaults.
struct Settings {
  RunConfig run;
  BackendKind backend = BackendKind::Scripted;
  std::filesystem::path script;
  std::filesystem::path out = "runs";
  std::filesystem::path prompts;  // override bundle directory, empty for the built-in bundle
  std::map<std::string, HttpBackendConfig> http;  // by role: reasoning, retrieval, judge

  bool operator==(const Settings&) const = default;
};

/// Throws Error(ConfigError) on unreadable or invalid values. `config_text`
/// is the content of the config file, when one was given.
Settings resolve_settings(const Flags& flags, const std::optional<std::string>& config_text);

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name. Returns 0 on success, 1 when the analysis itself failed,
/// 2 on usage or configuration errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace deot::cli
