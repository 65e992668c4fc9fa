#include "deot/prompter.hpp"

#include "deot/text.hpp"
#include "json.hpp"

namespace deot {

namespace {

using nlohmann::json;

[[noreturn]] void malformed(const std::string& what) {
  throw Error(Errc::MalformedModelOutput, what);
}

std::string required_string(const json& obj, const char* key) {
  const auto& v = obj.at(key);
  if (!v.is_string()) malformed(std::string("field ") + key + " must be a string");
  auto s = v.get<std::string>();
  if (text::is_blank(s)) malformed(std::string("field ") + key + " is empty");
  return s;
}

void require_exact_keys(const json& obj, std::initializer_list<const char*> keys,
                        std::string_view what) {
  if (!obj.is_object()) malformed(std::string(what) + " must be a JSON object");
  for (const char* k : keys) {
    if (!obj.contains(k)) malformed(std::string(what) + " lacks field " + k);
  }
  if (obj.size() != keys.size()) malformed(std::string(what) + " has unexpected fields");
}

}  // namespace

OptimizedQuery parse_optimized_query(std::string_view completion, bool expect_error_handling) {
  auto body = text::extract_balanced(text::strip_code_fences(completion), '{');
  if (!body) malformed("no JSON object in optimizer output");
  json doc;
  try {
    doc = json::parse(*body);
  } catch (const json::exception& e) {
    malformed(std::string("optimizer output is not valid JSON: ") + e.what());
  }
  if (expect_error_handling) {
    require_exact_keys(doc, {"optimized_query", "original_query", "modifications", "error_handling"},
                       "optimizer output");
  } else {
    require_exact_keys(doc, {"optimized_query", "original_query", "modifications"},
                       "optimizer output");
  }

  OptimizedQuery q;
  q.optimized_query = required_string(doc, "optimized_query");
  q.original_query = required_string(doc, "original_query");
  const auto& mods = doc.at("modifications");
  if (!mods.is_array()) malformed("modifications must be an array");
  for (const auto& m : mods) {
    if (!m.is_string()) malformed("modifications must contain strings");
    q.modifications.push_back(m.get<std::string>());
  }
  if (expect_error_handling) {
    const auto& eh = doc.at("error_handling");
    require_exact_keys(eh, {"original_error", "correction_explanation", "previous_attempt_analysis"},
                       "error_handling");
    q.error_handling = ErrorHandling{required_string(eh, "original_error"),
                                     required_string(eh, "correction_explanation"),
                                     required_string(eh, "previous_attempt_analysis")};
  }
  return q;
}

std::string format_optimized_query(const OptimizedQuery& q) {
  json doc = {{"optimized_query", q.optimized_query},
              {"original_query", q.original_query},
              {"modifications", q.modifications}};
  if (q.error_handling) {
    doc["error_handling"] = {{"original_error", q.error_handling->original_error},
                             {"correction_explanation", q.error_handling->correction_explanation},
                             {"previous_attempt_analysis", q.error_handling->previous_attempt_analysis}};
  }
  return doc.dump(2);
}

OptimizedQuery Prompter::optimize_query(std::string_view raw) const {
  if (text::is_blank(raw)) throw Error(Errc::InvalidInput, "query is empty");
  auto failed = ctx_.call("prompter.optimize", {{"input", std::string(raw)}});
  std::string last_error;
  try {
    auto q = parse_optimized_query(failed, false);
    q.original_query = std::string(raw);
    return q;
  } catch (const Error& e) {
    if (e.code() != Errc::MalformedModelOutput) throw;
    last_error = e.detail();
  }
  for (int attempt = 0; attempt < ctx_.config.max_parse_retries; ++attempt) {
    std::string completion;
    try {
      return recover(raw, last_error, failed, completion);
    } catch (const Error& e) {
      if (e.code() != Errc::MalformedModelOutput) throw;
      last_error = e.detail();
      failed = std::move(completion);
    }
  }
  throw Error(Errc::MalformedModelOutput, "query optimization failed: " + last_error);
}

OptimizedQuery Prompter::recover_query(std::string_view original, std::string_view error_message,
                                       std::string_view failed_result) const {
  std::string completion;
  return recover(original, error_message, failed_result, completion);
}

OptimizedQuery Prompter::recover(std::string_view original, std::string_view error_message,
                                 std::string_view failed_result, std::string& completion) const {
  if (text::is_blank(original) || text::is_blank(error_message) || text::is_blank(failed_result)) {
    throw Error(Errc::InvalidInput, "recovery needs the original query, error and failed result");
  }
  completion = ctx_.call("prompter.error", {{"original_query", std::string(original)},
                                            {"error_message", std::string(error_message)},
                                            {"failed_result", std::string(failed_result)}});
  auto q = parse_optimized_query(completion, true);
  if (q.original_query != original) {
    ctx_.warn("recovery changed the original query to \"" + q.original_query + "\"; kept \"" +
              std::string(original) + "\"");
    q.original_query = std::string(original);
  }
  return q;
}

}  // namespace deot
