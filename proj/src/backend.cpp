#include "deot/backend.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "deot/text.hpp"

namespace deot {

std::string Backend::complete(const CompletionRequest& request) {
  {
    std::lock_guard lock(mutex_);
    ++calls_;
  }
  TranscriptEntry entry{request, {}, {}};
  try {
    if (text::is_blank(request.user_prompt)) {
      throw Error(Errc::InvalidInput, "completion request has an empty user prompt");
    }
    auto response = do_complete(request);
    if (text::is_blank(response)) {
      throw Error(Errc::EmptyCompletion, "backend returned an empty completion for " + request.tag);
    }
    entry.response = response;
    std::lock_guard lock(mutex_);
    if (recording_) transcript_.push_back(std::move(entry));
    return response;
  } catch (const std::exception& e) {
    entry.error = e.what();
    std::lock_guard lock(mutex_);
    if (recording_) transcript_.push_back(std::move(entry));
    throw;
  }
}

void Backend::set_recording(bool enabled) {
  std::lock_guard lock(mutex_);
  recording_ = enabled;
}

std::vector<TranscriptEntry> Backend::transcript() const {
  std::lock_guard lock(mutex_);
  return transcript_;
}

void Backend::clear_transcript() {
  std::lock_guard lock(mutex_);
  transcript_.clear();
}

std::size_t Backend::call_count() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

bool ScriptEntry::matches(const CompletionRequest& request) const {
  if (!tag.empty()) {
    if (tag.back() == '*') {
      std::string_view prefix(tag.data(), tag.size() - 1);
      if (request.tag.compare(0, prefix.size(), prefix) != 0) return false;
    } else if (tag != request.tag) {
      return false;
    }
  }
  return contains.empty() || request.user_prompt.find(contains) != std::string::npos;
}

ScriptedBackend& ScriptedBackend::add(ScriptEntry entry) {
  std::lock_guard lock(entries_mutex_);
  entries_.push_back(std::move(entry));
  return *this;
}

ScriptedBackend& ScriptedBackend::respond(std::string tag, std::string response,
                                          std::optional<int> times) {
  ScriptEntry e;
  e.tag = std::move(tag);
  e.response = std::move(response);
  e.calls_remaining = times;
  return add(std::move(e));
}

ScriptedBackend& ScriptedBackend::respond_with(std::string tag, Responder responder) {
  ScriptEntry e;
  e.tag = std::move(tag);
  e.responder = std::move(responder);
  return add(std::move(e));
}

std::string ScriptedBackend::do_complete(const CompletionRequest& request) {
  // Held across the responder call so consumption order stays deterministic.
  std::lock_guard lock(entries_mutex_);
  for (auto& entry : entries_) {
    if (entry.calls_remaining && *entry.calls_remaining <= 0) continue;
    if (!entry.matches(request)) continue;
    if (entry.calls_remaining) --*entry.calls_remaining;
    if (entry.failure) throw Error(*entry.failure, "scripted failure for " + request.tag);
    return entry.responder ? entry.responder(request) : entry.response;
  }
  throw Error(Errc::ScriptExhausted, "no script entry matches tag '" + request.tag + "'");
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_json_text(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedFile, std::string("script is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("schema", "") != "deot.script/1") {
    throw Error(Errc::VersionMismatch, "script schema must be deot.script/1");
  }
  auto backend = std::make_shared<ScriptedBackend>();
  try {
    for (const auto& item : doc.at("entries")) {
      ScriptEntry e;
      e.tag = item.value("tag", "");
      e.contains = item.value("contains", "");
      e.response = item.value("response", "");
      if (item.contains("times")) e.calls_remaining = item.at("times").get<int>();
      if (item.contains("fail")) {
        auto name = item.at("fail").get<std::string>();
        if (name == "TransportError") {
          e.failure = Errc::TransportError;
        } else if (name == "EmptyCompletion") {
          e.failure = Errc::EmptyCompletion;
        } else {
          throw Error(Errc::MalformedFile, "unsupported scripted failure '" + name + "'");
        }
      }
      backend->add(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedFile, std::string("malformed script entry: ") + e.what());
  }
  return backend;
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open script file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

void RetryPolicy::validate() const {
  if (max_attempts < 1) throw Error(Errc::InvalidInput, "max_attempts must be >= 1");
  if (backoff.size() + 1 < static_cast<std::size_t>(max_attempts)) {
    throw Error(Errc::InvalidInput, "backoff schedule shorter than max_attempts - 1");
  }
}

bool is_retryable(Errc code) noexcept {
  return code == Errc::TransportError || code == Errc::EmptyCompletion;
}

}  // namespace deot
