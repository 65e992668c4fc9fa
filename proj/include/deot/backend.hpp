#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "deot/error.hpp"

namespace deot {

struct CompletionRequest {
  std::string system_prompt;
  std::string user_prompt;
  double temperature = 0.0;
  std::string tag;  // id of the prompt template that produced the request

  bool operator==(const CompletionRequest&) const = default;
};

struct TranscriptEntry {
  CompletionRequest request;
  std::string response;  // empty when the call failed
  std::string error;     // what() of the failure, empty on success

  bool ok() const noexcept { return error.empty(); }
  bool operator==(const TranscriptEntry&) const = default;
};

/// Text-generation endpoint. complete() is thread-safe; subclasses implement
/// do_complete() and may be called concurrently.
class Backend {
 public:
  virtual ~Backend() = default;

  /// Throws TransportError, EmptyCompletion, ScriptExhausted or InvalidInput.
  std::string complete(const CompletionRequest& request);

  void set_recording(bool enabled);
  std::vector<TranscriptEntry> transcript() const;
  void clear_transcript();
  /// Calls attempted so far, recorded or not.
  std::size_t call_count() const;

 protected:
  virtual std::string do_complete(const CompletionRequest& request) = 0;

 private:
  mutable std::mutex mutex_;
  bool recording_ = false;
  std::size_t calls_ = 0;
  std::vector<TranscriptEntry> transcript_;
};

/// Backend assignment per tool role. Retrieval serves news/info search, Reasoning everything else.
struct BackendSet {
  std::shared_ptr<Backend> reasoning;
  std::shared_ptr<Backend> retrieval;

  static BackendSet shared(std::shared_ptr<Backend> backend) { return {backend, backend}; }
};

// ---------------------------------------------------------------------------
// Scripted backend

using Responder = std::function<std::string(const CompletionRequest&)>;

struct ScriptEntry {
  std::string tag;       // exact tag, "prefix*", or empty for any
  std::string contains;  // substring of the user prompt, or empty for any
  std::string response;
  Responder responder;                  // overrides `response` when set
  std::optional<int> calls_remaining;   // nullopt = unlimited
  std::optional<Errc> failure;          // raise this error instead of responding

  bool matches(const CompletionRequest& request) const;
};

/// Deterministic backend for tests and offline runs: the first entry (in
/// declaration order) that matches and still has calls left answers.
class ScriptedBackend : public Backend {
 public:
  ScriptedBackend() = default;
  explicit ScriptedBackend(std::vector<ScriptEntry> entries) : entries_(std::move(entries)) {}

  ScriptedBackend& add(ScriptEntry entry);
  ScriptedBackend& respond(std::string tag, std::string response,
                           std::optional<int> times = std::nullopt);
  ScriptedBackend& respond_with(std::string tag, Responder responder);

  /// Script document: {"schema":"deot.script/1","entries":[{tag, contains, response, times, fail}]}.
  static std::shared_ptr<ScriptedBackend> from_file(const std::filesystem::path& path);
  static std::shared_ptr<ScriptedBackend> from_json_text(std::string_view text);

 protected:
  std::string do_complete(const CompletionRequest& request) override;

 private:
  std::mutex entries_mutex_;
  std::vector<ScriptEntry> entries_;
};

// ---------------------------------------------------------------------------
// Retry

struct RetryPolicy {
  int max_attempts = 3;
  std::vector<std::chrono::milliseconds> backoff{std::chrono::milliseconds{500},
                                                 std::chrono::milliseconds{2000}};

  /// len(backoff) >= max_attempts - 1; throws Error(InvalidInput).
  void validate() const;
  static RetryPolicy single_attempt() { return {1, {}}; }

  bool operator==(const RetryPolicy&) const = default;
};

/// Only transport-level failures are worth another attempt; parse failures
/// are handled by the caller re-prompting.
bool is_retryable(Errc code) noexcept;

using Sleeper = std::function<void(std::chrono::milliseconds)>;

inline void sleep_for(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

template <typename Action>
auto with_retry(Action&& action, const RetryPolicy& policy, const Sleeper& sleeper = sleep_for)
    -> std::invoke_result_t<Action&> {
  policy.validate();
  for (int attempt = 1;; ++attempt) {
    try {
      return action();
    } catch (const Error& e) {
      if (!is_retryable(e.code()) || attempt >= policy.max_attempts) throw;
      sleeper(policy.backoff[static_cast<std::size_t>(attempt - 1)]);
    }
  }
}

}  // namespace deot
