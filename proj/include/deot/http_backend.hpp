#pragma once

#include <chrono>
#include <string>

#include "deot/backend.hpp"

namespace deot {

struct HttpBackendConfig {
  std::string endpoint;  // full URL, e.g. https://api.example.com/v1/chat/completions
  std::string model;
  std::string api_key_env;  // name of the environment variable holding the bearer token
  std::string response_path = "/choices/0/message/content";  // JSON pointer into the reply
  RetryPolicy retry;
  std::chrono::seconds timeout{120};

  /// Throws Error(ConfigError) when endpoint or model is missing.
  void validate() const;

  bool operator==(const HttpBackendConfig&) const = default;
};

/// Chat-completion style endpoint. Each call is retried per the configured policy.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config, Sleeper sleeper = sleep_for);

  const HttpBackendConfig& config() const noexcept { return config_; }

 protected:
  std::string do_complete(const CompletionRequest& request) override;

 private:
  std::string attempt(const CompletionRequest& request) const;

  HttpBackendConfig config_;
  Sleeper sleeper_;
  std::string scheme_host_port_;
  std::string path_;
};

}  // namespace deot
