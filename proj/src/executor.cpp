#include "deot/executor.hpp"

#include <algorithm>
#include <future>
#include <map>
#include <optional>
#include <set>

#include "deot/text.hpp"

namespace deot {

namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw Error(Errc::MalformedModelOutput, what);
}

}  // namespace

Waves schedule(const TaskPlan& plan) {
  std::set<std::string> placed;
  std::vector<bool> done(plan.tasks.size(), false);
  Waves waves;
  std::size_t remaining = plan.tasks.size();
  while (remaining > 0) {
    std::vector<std::string> wave;
    std::vector<std::size_t> picked;
    for (std::size_t i = 0; i < plan.tasks.size(); ++i) {
      if (done[i]) continue;
      const auto& deps = plan.tasks[i].dep;
      if (std::all_of(deps.begin(), deps.end(), [&](const auto& d) { return placed.contains(d); })) {
        wave.push_back(plan.tasks[i].id);
        picked.push_back(i);
      }
    }
    if (wave.empty()) throw Error(Errc::CyclicDependencies, "task dependencies contain a cycle");
    for (auto i : picked) {
      done[i] = true;
      placed.insert(plan.tasks[i].id);
    }
    remaining -= picked.size();
    waves.push_back(std::move(wave));
  }
  return waves;
}

std::string with_dependency_context(std::string_view input,
                                    const std::vector<const ExecutionRecord*>& dependencies) {
  std::string out(input);
  if (dependencies.empty()) return out;
  out += "\n\nContext from dependencies:";
  for (const auto* r : dependencies) out += "\n[" + r->task_id + "] " + r->result;
  return out;
}

std::vector<ExecutionRecord> Executor::execute(const TaskPlan& plan) const {
  auto waves = schedule(plan);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < plan.tasks.size(); ++i) index.emplace(plan.tasks[i].id, i);

  std::vector<ExecutionRecord> records(plan.tasks.size());
  for (std::size_t i = 0; i < plan.tasks.size(); ++i) {
    records[i].task_id = plan.tasks[i].id;
    records[i].task_name = plan.tasks[i].name;
  }

  int clock = 0;
  for (const auto& wave : waves) {
    struct Job {
      std::size_t slot;
      std::string input;
    };
    std::vector<Job> jobs;
    for (const auto& id : wave) {
      auto slot = index.at(id);
      const auto& task = plan.tasks[slot];
      std::vector<const ExecutionRecord*> deps;
      std::optional<std::string> blocked;
      for (const auto& d : task.dep) {
        const auto& dep_record = records[index.at(d)];
        if (dep_record.status != TaskStatus::Success) {
          blocked = d;
          break;
        }
        deps.push_back(&dep_record);
      }
      if (blocked) {
        records[slot].status = TaskStatus::Skipped;
        records[slot].result = "Skipped: dependency " + *blocked + " did not succeed";
        continue;
      }
      const auto* tool = toolbox_.registry().find(task.name);
      // "query,number" inputs cannot carry extra text.
      bool free_text = tool == nullptr || tool->input_contract == InputContract::FreeText;
      jobs.push_back({slot, free_text ? with_dependency_context(task.input, deps) : task.input});
      records[slot].started = clock++;
    }

    auto run = [this, &plan](const Job& job) -> std::pair<TaskStatus, std::string> {
      try {
        auto out = toolbox_.invoke(plan.tasks[job.slot].name, job.input);
        return {TaskStatus::Success, std::move(out.text)};
      } catch (const std::exception& e) {
        return {TaskStatus::Failure, e.what()};
      }
    };

    std::vector<std::pair<TaskStatus, std::string>> outcomes;
    if (parallel_ && jobs.size() > 1) {
      std::vector<std::future<std::pair<TaskStatus, std::string>>> futures;
      for (const auto& job : jobs) futures.push_back(std::async(std::launch::async, run, std::cref(job)));
      for (auto& f : futures) outcomes.push_back(f.get());
    } else {
      for (const auto& job : jobs) outcomes.push_back(run(job));
    }
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      auto& rec = records[jobs[j].slot];
      rec.status = outcomes[j].first;
      rec.result = std::move(outcomes[j].second);
      rec.finished = clock++;
    }
  }
  return records;
}

std::string format_task_results(const std::vector<ExecutionRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    if (!out.empty()) out += "\n\n";
    out += "- Task Name: " + r.task_name + "\n";
    out += "- Task ID: " + r.task_id + "\n";
    out += std::string("- Execution Status: ") + (r.status == TaskStatus::Success ? "Success" : "Failure") + "\n";
    out += "- Task Result: " + r.result;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Summary block

namespace {

constexpr std::string_view kKeyFindings = "KEY FINDINGS:";
constexpr std::string_view kEvidence = "EVIDENCE AND DATA:";
constexpr std::string_view kAnalysis = "ANALYSIS:";
constexpr std::string_view kConflicts = "CONFLICTING INFORMATION:";
constexpr std::string_view kConclusion = "CONCLUSION:";

std::string join_lines(const std::vector<std::string_view>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '\n';
    out += lines[i];
  }
  return std::string(text::trim(out));
}

bool is_skip_note(std::string_view line) {
  return text::to_lower(text::trim(line)) == "(skip if none found)";
}

}  // namespace

ExecutionSummary parse_summary(std::string_view completion) {
  auto lines = text::split_lines(completion);
  std::optional<std::size_t> open, close;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto t = text::trim(lines[i]);
    if (t == "[SUMMARY]" && !open) open = i;
    if (t == "[END SUMMARY]" && open && !close) close = i;
  }
  if (!open) malformed("summary lacks the [SUMMARY] marker");
  if (!close) malformed("summary lacks the [END SUMMARY] marker");

  const std::string_view headers[] = {kKeyFindings, kEvidence, kAnalysis, kConflicts, kConclusion};
  std::map<std::string_view, std::vector<std::string_view>> sections;
  std::optional<std::string_view> current;
  for (std::size_t i = *open + 1; i < *close; ++i) {
    auto line = lines[i];
    auto t = text::trim(line);
    bool is_header = false;
    for (auto h : headers) {
      if (t.substr(0, h.size()) == h) {
        if (sections.contains(h)) malformed("summary repeats section " + std::string(h));
        current = h;
        sections[h];
        auto rest = text::trim(t.substr(h.size()));
        if (!rest.empty()) sections[h].push_back(rest);
        is_header = true;
        break;
      }
    }
    if (is_header) continue;
    if (!current) {
      if (t.empty()) continue;
      malformed("summary text before the first section header");
    }
    sections[*current].push_back(line);
  }
  for (auto h : {kKeyFindings, kEvidence, kAnalysis, kConclusion}) {
    if (!sections.contains(h)) malformed("summary lacks section " + std::string(h));
  }

  ExecutionSummary s;
  s.key_findings = join_lines(sections[kKeyFindings]);
  s.evidence = text::parse_bullets(join_lines(sections[kEvidence]));
  s.analysis = join_lines(sections[kAnalysis]);
  if (sections.contains(kConflicts)) {
    std::vector<std::string_view> kept;
    for (auto l : sections[kConflicts]) {
      if (!is_skip_note(l)) kept.push_back(l);
    }
    s.conflicts = text::parse_bullets(join_lines(kept));
  }
  s.conclusion = join_lines(sections[kConclusion]);
  if (s.key_findings.empty()) malformed("KEY FINDINGS section is empty");
  if (s.conclusion.empty()) malformed("CONCLUSION section is empty");
  s.raw = std::string(completion);
  return s;
}

std::string format_summary(const ExecutionSummary& s) {
  std::string out = "[SUMMARY]\n";
  out += std::string(kKeyFindings) + "\n" + s.key_findings + "\n\n";
  out += std::string(kEvidence) + "\n";
  for (const auto& e : s.evidence) out += "- " + e + "\n";
  out += "\n" + std::string(kAnalysis) + "\n" + s.analysis + "\n\n";
  if (!s.conflicts.empty()) {
    out += std::string(kConflicts) + "\n";
    for (const auto& c : s.conflicts) out += "- " + c + "\n";
    out += "\n";
  }
  out += std::string(kConclusion) + "\n" + s.conclusion + "\n[END SUMMARY]";
  return out;
}

// ---------------------------------------------------------------------------
// Validation blocks

namespace {

// Leading token of a STATUS/CONFIDENCE value, e.g. "VALID (no errors)" -> "VALID".
std::string_view leading_token(std::string_view value) {
  value = text::trim(value);
  auto end = value.find_first_of(" \t(");
  return end == std::string_view::npos ? value : value.substr(0, end);
}

ValidationEntry parse_validation_block(const std::vector<std::string_view>& lines, bool with_task_id) {
  constexpr std::string_view kTaskId = "TASK ID", kStatus = "STATUS", kConfidence = "CONFIDENCE",
                             kIssues = "ISSUES", kEvidenceKey = "EVIDENCE";
  std::map<std::string_view, std::vector<std::string_view>> fields;
  std::optional<std::string_view> current;
  for (auto line : lines) {
    bool matched = false;
    for (auto key : {kTaskId, kStatus, kConfidence, kIssues, kEvidenceKey}) {
      if (auto v = text::field_value(line, key)) {
        if (fields.contains(key)) malformed("validation block repeats " + std::string(key));
        fields[key];
        if (!v->empty()) fields[key].push_back(*v);
        current = key;
        matched = true;
        break;
      }
      if (text::trim(line) == std::string(key) + ":") {
        if (fields.contains(key)) malformed("validation block repeats " + std::string(key));
        fields[key];
        current = key;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (text::is_blank(line)) continue;
    if (current == kIssues || current == kEvidenceKey) {
      fields[*current].push_back(line);
    } else {
      malformed("unexpected line in validation block: " + std::string(text::trim(line)));
    }
  }

  std::vector<std::string_view> required = {kStatus, kConfidence, kIssues, kEvidenceKey};
  if (with_task_id) required.insert(required.begin(), kTaskId);
  for (auto key : required) {
    if (!fields.contains(key)) malformed("validation block lacks " + std::string(key));
  }
  if (!with_task_id && fields.contains(kTaskId)) malformed("summary validation must not carry a TASK ID");

  ValidationEntry e;
  if (with_task_id) {
    if (fields[kTaskId].size() != 1) malformed("TASK ID must be a single value");
    e.task_id = std::string(fields[kTaskId].front());
  }
  auto single = [&](std::string_view key) {
    if (fields[key].size() != 1) malformed(std::string(key) + " must be a single value");
    return leading_token(fields[key].front());
  };
  auto status = verdict_from_string(single(kStatus));
  if (!status) malformed("STATUS must be VALID or INVALID");
  auto confidence = confidence_from_string(single(kConfidence));
  if (!confidence) malformed("CONFIDENCE must be HIGH, MEDIUM or LOW");
  e.status = *status;
  e.confidence = *confidence;
  auto bullets = [](const std::vector<std::string_view>& ls) {
    std::string block;
    for (auto l : ls) block += std::string(l) + "\n";
    return text::parse_bullets(block);
  };
  e.issues = bullets(fields[kIssues]);
  e.evidence = bullets(fields[kEvidenceKey]);
  return e;
}

}  // namespace

ValidationReport parse_validation(std::string_view completion) {
  enum class Where { Outside, Task, Summary } where = Where::Outside;
  std::vector<std::string_view> block;
  ValidationReport report;
  int summary_blocks = 0;
  for (auto line : text::split_lines(completion)) {
    auto t = text::trim(line);
    if (t == "[TASK VALIDATION]" || t == "[SUMMARY VALIDATION]") {
      if (where != Where::Outside) malformed("validation block opened inside another block");
      where = t == "[TASK VALIDATION]" ? Where::Task : Where::Summary;
      block.clear();
    } else if (t == "[END TASK VALIDATION]") {
      if (where != Where::Task) malformed("unmatched [END TASK VALIDATION]");
      report.task_validations.push_back(parse_validation_block(block, true));
      where = Where::Outside;
    } else if (t == "[END SUMMARY VALIDATION]") {
      if (where != Where::Summary) malformed("unmatched [END SUMMARY VALIDATION]");
      report.summary_validation = parse_validation_block(block, false);
      ++summary_blocks;
      where = Where::Outside;
    } else if (where != Where::Outside) {
      block.push_back(line);
    }
  }
  if (where != Where::Outside) malformed("validation block is not closed");
  if (summary_blocks != 1) malformed("expected exactly one [SUMMARY VALIDATION] block");
  return report;
}

std::string format_validation(const ValidationReport& report) {
  auto body = [](const ValidationEntry& e) {
    std::string out;
    out += "STATUS: " + std::string(to_string(e.status)) + "\n";
    out += "CONFIDENCE: " + std::string(to_string(e.confidence)) + "\n";
    out += "ISSUES:\n";
    for (const auto& i : e.issues) out += "- " + i + "\n";
    if (e.issues.empty()) out += "- None\n";
    out += "EVIDENCE:\n";
    for (const auto& i : e.evidence) out += "- " + i + "\n";
    if (e.evidence.empty()) out += "- None\n";
    return out;
  };
  std::string out;
  for (const auto& t : report.task_validations) {
    out += "[TASK VALIDATION]\nTASK ID: " + t.task_id + "\n" + body(t) + "[END TASK VALIDATION]\n\n";
  }
  out += "[SUMMARY VALIDATION]\n" + body(report.summary_validation) + "[END SUMMARY VALIDATION]";
  return out;
}

// ---------------------------------------------------------------------------

ExecutionSummary Summarizer::summarize(std::string_view original_query,
                                       const std::vector<ExecutionRecord>& records,
                                       const std::vector<std::string>& issues) const {
  if (records.empty()) throw Error(Errc::InvalidInput, "nothing to summarize");
  auto results = format_task_results(records);
  if (!issues.empty()) {
    results += "\n\nFact-check issues to correct in this summary:";
    for (const auto& i : issues) results += "\n- " + i;
  }
  return call_parsed(ctx_, "executor.summarize",
                     {{"original_query", std::string(original_query)}, {"results", results}},
                     [](const std::string& completion) { return parse_summary(completion); });
}

ValidationReport Summarizer::fact_check(std::string_view query, std::string_view source,
                                        std::string_view content, const ExecutionSummary& summary) const {
  auto completion = ctx_.call("executor.fact_check", {{"current_date", format_date(ctx_.config.run_date)},
                                                      {"query", std::string(query)},
                                                      {"source", std::string(source)},
                                                      {"content", std::string(content)},
                                                      {"summary", format_summary(summary)}});
  return parse_validation(completion);
}

}  // namespace deot
