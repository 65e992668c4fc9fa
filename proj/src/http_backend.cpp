#include "deot/http_backend.hpp"

#include <cstdlib>

#include "httplib.h"
#include "json.hpp"

namespace deot {

void HttpBackendConfig::validate() const {
  if (endpoint.empty()) throw Error(Errc::ConfigError, "http backend requires an endpoint");
  if (model.empty()) throw Error(Errc::ConfigError, "http backend requires a model name");
  retry.validate();
}

namespace {

// Splits "scheme://host[:port]/path" into the client base and the request path.
std::pair<std::string, std::string> split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(Errc::ConfigError, "endpoint must include a scheme: " + url);
  }
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleeper_(std::move(sleeper)) {
  config_.validate();
  std::tie(scheme_host_port_, path_) = split_url(config_.endpoint);
}

std::string HttpBackend::do_complete(const CompletionRequest& request) {
  return with_retry([&] { return attempt(request); }, config_.retry, sleeper_);
}

std::string HttpBackend::attempt(const CompletionRequest& request) const {
  nlohmann::json body = {
      {"model", config_.model},
      {"messages",
       nlohmann::json::array({{{"role", "system"}, {"content", request.system_prompt}},
                              {{"role", "user"}, {"content", request.user_prompt}}})},
      {"temperature", request.temperature},
  };

  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);

  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw Error(Errc::ConfigError, "environment variable " + config_.api_key_env + " is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) {
    throw Error(Errc::TransportError, "request to " + config_.endpoint + " failed: " +
                                          httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(Errc::TransportError,
                "endpoint returned HTTP " + std::to_string(res->status) + " for " + request.tag);
  }

  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception&) {
    throw Error(Errc::TransportError, "endpoint reply is not JSON");
  }
  nlohmann::json::json_pointer pointer;
  try {
    pointer = nlohmann::json::json_pointer(config_.response_path);
  } catch (const nlohmann::json::exception&) {
    throw Error(Errc::ConfigError, "invalid response_path " + config_.response_path);
  }
  if (!reply.contains(pointer) || !reply.at(pointer).is_string()) {
    throw Error(Errc::TransportError, "reply has no text at " + config_.response_path);
  }
  auto content = reply.at(pointer).get<std::string>();
  if (content.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw Error(Errc::EmptyCompletion, "endpoint returned an empty completion for " + request.tag);
  }
  return content;
}

}  // namespace deot
