#include <functional>
#include <map>
#include <random>

#include "doctest.h"
#include "documents.hpp"
#include "expect.hpp"
#include "deot/executor.hpp"

using namespace deot;
using namespace deot::testing;

namespace {

TaskSpec task(std::string id, std::string name, std::string input, std::vector<std::string> dep = {}) {
  return {"do " + id, std::move(id), std::move(name), std::move(input), "because", std::move(dep)};
}

// Wave of each task = 1 + deepest dependency wave, or nullopt on a cycle.
std::optional<Waves> schedule_oracle(const TaskPlan& plan) {
  std::map<std::string, const TaskSpec*> by_id;
  for (const auto& t : plan.tasks) by_id[t.id] = &t;
  std::map<std::string, int> depth;
  std::map<std::string, bool> visiting;
  bool cycle = false;
  std::function<int(const std::string&)> visit = [&](const std::string& id) -> int {
    if (depth.contains(id)) return depth[id];
    if (visiting[id]) {
      cycle = true;
      return 0;
    }
    visiting[id] = true;
    int d = 0;
    for (const auto& dep : by_id.at(id)->dep) d = std::max(d, visit(dep) + 1);
    visiting[id] = false;
    return depth[id] = d;
  };
  for (const auto& t : plan.tasks) visit(t.id);
  if (cycle) return std::nullopt;
  Waves waves;
  for (const auto& t : plan.tasks) {
    auto d = static_cast<std::size_t>(depth[t.id]);
    if (waves.size() <= d) waves.resize(d + 1);
    waves[d].push_back(t.id);
  }
  return waves;
}

TaskPlan random_graph(std::mt19937& rng) {
  TaskPlan plan;
  int n = 1 + static_cast<int>(rng() % 6);
  for (int i = 0; i < n; ++i) {
    std::vector<std::string> dep;
    for (int j = 0; j < n; ++j) {
      // Mostly backward edges; the occasional forward edge may close a cycle.
      bool edge = j < i ? rng() % 3 == 0 : rng() % 15 == 0;
      if (edge) dep.push_back("t" + std::to_string(j));
    }
    plan.tasks.push_back(task("t" + std::to_string(i), "llm", "x", dep));
  }
  std::shuffle(plan.tasks.begin(), plan.tasks.end(), rng);
  return plan;
}

struct Fixture {
  RunConfig config;
  RunLog log;
  ToolRegistry registry = ToolRegistry::defaults();
  std::shared_ptr<ScriptedBackend> backend = std::make_shared<ScriptedBackend>();
  Toolbox toolbox{registry, BackendSet::shared(backend), TemplateStore::defaults(), config};
  ModelContext ctx{*backend, TemplateStore::defaults(), config, &log};
  Fixture() { backend->set_recording(true); }
};

ExecutionSummary without_raw(ExecutionSummary s) {
  s.raw.clear();
  return s;
}

}  // namespace

TEST_SUITE("executor") {
  TEST_CASE("schedule matches the longest-path oracle") {
    std::mt19937 rng(5);
    int cyclic = 0;
    for (int i = 0; i < 2000; ++i) {
      auto plan = random_graph(rng);
      auto expected = schedule_oracle(plan);
      if (expected) {
        CHECK(schedule(plan) == *expected);
      } else {
        ++cyclic;
        CHECK(errc_of([&] { schedule(plan); }) == Errc::CyclicDependencies);
      }
    }
    CHECK(cyclic > 0);
  }

  TEST_CASE("independent tasks share the first wave") {
    TaskPlan plan{{task("a", "llm", "x"), task("b", "llm", "y"), task("c", "llm", "z", {"a", "b"})}};
    CHECK(schedule(plan) == Waves{{"a", "b"}, {"c"}});
  }

  TEST_CASE("dependency results are appended to free-text inputs") {
    Fixture f;
    f.backend->respond("tool.reasoning", "first result", 1);
    f.backend->respond("tool.event_extractor", "events");
    TaskPlan plan{{task("t1", "llm", "question"), task("t2", "event_extractor", "extract", {"t1"})}};
    auto records = Executor(f.toolbox).execute(plan);
    REQUIRE(records.size() == 2);
    CHECK(records[0].status == TaskStatus::Success);
    CHECK(records[1].status == TaskStatus::Success);
    auto t = f.backend->transcript();
    REQUIRE(t.size() == 2);
    CHECK(t[1].request.user_prompt.find("extract\n\nContext from dependencies:\n[t1] first result") != std::string::npos);
    CHECK(records[0].started < records[0].finished);
    CHECK(records[0].finished < records[1].started);
  }

  TEST_CASE("news inputs keep their query,count form behind a dependency") {
    Fixture f;
    f.backend->respond("", "ok");
    TaskPlan plan{{task("t1", "llm", "q"), task("t2", "news_search", "Tesla,2", {"t1"})}};
    auto records = Executor(f.toolbox).execute(plan);
    CHECK(records[1].status == TaskStatus::Success);
    auto t = f.backend->transcript();
    CHECK(t[1].request.user_prompt.find("Context from dependencies") == std::string::npos);
  }

  TEST_CASE("a failure skips every task behind it") {
    Fixture f;
    f.backend->add(ScriptEntry{"tool.info_search", "", "", {}, std::nullopt, Errc::TransportError});
    f.backend->respond("", "ok");
    TaskPlan plan{{task("a", "info_search", "x"), task("b", "llm", "y", {"a"}), task("c", "llm", "z", {"b"}),
                   task("d", "llm", "w")}};
    for (bool parallel : {false, true}) {
      auto records = Executor(f.toolbox, parallel).execute(plan);
      CHECK(records[0].status == TaskStatus::Failure);
      CHECK(records[0].result.find("TransportError") != std::string::npos);
      CHECK(records[1].status == TaskStatus::Skipped);
      CHECK(records[1].result == "Skipped: dependency a did not succeed");
      CHECK(records[2].status == TaskStatus::Skipped);
      CHECK(records[2].result == "Skipped: dependency b did not succeed");
      CHECK(records[2].started == -1);
      CHECK(records[3].status == TaskStatus::Success);
    }
  }

  TEST_CASE("malformed tool input fails only that task") {
    Fixture f;
    f.backend->respond("", "ok");
    TaskPlan plan{{task("a", "news_search", "no count"), task("b", "llm", "y")}};
    auto records = Executor(f.toolbox).execute(plan);
    CHECK(records[0].status == TaskStatus::Failure);
    CHECK(records[0].result.find("MalformedToolInput") != std::string::npos);
    CHECK(records[1].status == TaskStatus::Success);
  }

  TEST_CASE("parallel and sequential execution agree on every failure pattern") {
    // Three tasks: a, b independent; c depends on both. Enumerate which tools fail.
    for (int mask = 0; mask < 8; ++mask) {
      CAPTURE(mask);
      std::vector<std::vector<ExecutionRecord>> runs;
      for (bool parallel : {false, true}) {
        Fixture f;
        const char* tags[] = {"tool.event_extractor", "tool.history_analyzer", "tool.reasoning"};
        for (int i = 0; i < 3; ++i) {
          if (mask & (1 << i)) f.backend->add(ScriptEntry{tags[i], "", "", {}, std::nullopt, Errc::TransportError});
        }
        f.backend->respond("", "ok");
        TaskPlan plan{{task("a", "event_extractor", "x"), task("b", "history_analyzer", "y"),
                       task("c", "llm", "z", {"a", "b"})}};
        runs.push_back(Executor(f.toolbox, parallel).execute(plan));
      }
      CHECK(runs[0] == runs[1]);
      const auto& r = runs[0];
      bool a_ok = !(mask & 1), b_ok = !(mask & 2);
      CHECK((r[0].status == TaskStatus::Success) == a_ok);
      CHECK((r[1].status == TaskStatus::Success) == b_ok);
      if (!a_ok || !b_ok) {
        CHECK(r[2].status == TaskStatus::Skipped);
      } else {
        CHECK(r[2].status == ((mask & 4) ? TaskStatus::Failure : TaskStatus::Success));
      }
    }
  }

  TEST_CASE("task result blocks") {
    std::vector<ExecutionRecord> records = {{"t1", "llm", TaskStatus::Success, "answer", 0, 1},
                                            {"t2", "info_search", TaskStatus::Skipped, "Skipped: x", -1, -1}};
    CHECK(format_task_results(records) ==
          "- Task Name: llm\n- Task ID: t1\n- Execution Status: Success\n- Task Result: answer\n\n"
          "- Task Name: info_search\n- Task ID: t2\n- Execution Status: Failure\n- Task Result: Skipped: x");
  }

  TEST_CASE("summary golden") {
    auto s = parse_summary(kSummaryReply);
    CHECK(s.key_findings == "Tesla shares rose in December on delivery expectations.");
    CHECK(s.evidence == std::vector<std::string>{"Deliveries beat estimates by 4%", "Shares closed up 3% on the week",
                                                 "Analysts raised price targets"});
    CHECK(s.analysis == "Demand signals improved after the price cuts.\n\nMargins remain under pressure.");
    CHECK(s.conflicts == std::vector<std::string>{"Conflict 1: one outlet reports flat deliveries"});
    CHECK(s.conclusion == "Momentum is positive but margin risk persists.");
    CHECK(s.raw == kSummaryReply);
    CHECK(without_raw(parse_summary(format_summary(s))) == without_raw(s));
  }

  TEST_CASE("summary without conflicts section") {
    auto doc = replace_first(kSummaryReply, "CONFLICTING INFORMATION:\n- Conflict 1: one outlet reports flat deliveries\n(Skip if none found)\n\n", "");
    auto s = parse_summary(doc);
    CHECK(s.conflicts.empty());
    CHECK(s.conclusion == "Momentum is positive but margin risk persists.");
    auto skipped = replace_first(kSummaryReply, "- Conflict 1: one outlet reports flat deliveries\n", "");
    CHECK(parse_summary(skipped).conflicts.empty());
  }

  TEST_CASE("summary mutations are rejected") {
    for (const char* line : {"[SUMMARY]", "[END SUMMARY]", "KEY FINDINGS:", "EVIDENCE AND DATA:", "ANALYSIS:", "CONCLUSION:"}) {
      CAPTURE(line);
      CHECK(errc_of([&] { parse_summary(drop_line(kSummaryReply, line)); }) == Errc::MalformedModelOutput);
    }
    CHECK(errc_of([] { parse_summary(replace_first(kSummaryReply, "CONCLUSION:", "ANALYSIS:")); }) ==
          Errc::MalformedModelOutput);
    CHECK(errc_of([] { parse_summary(replace_first(kSummaryReply, "Momentum is positive but margin risk persists.", "")); }) ==
          Errc::MalformedModelOutput);
    CHECK(errc_of([] { parse_summary("[SUMMARY]\nstray text\nKEY FINDINGS:\nx\n[END SUMMARY]"); }) ==
          Errc::MalformedModelOutput);
  }

  TEST_CASE("validation golden") {
    auto v = parse_validation(kValidationReply);
    REQUIRE(v.task_validations.size() == 2);
    CHECK(v.task_validations[0].task_id == "task1");
    CHECK(v.task_validations[0].status == Verdict::Valid);
    CHECK(v.task_validations[0].issues.empty());
    CHECK(v.task_validations[0].evidence == std::vector<std::string>{"Reuters, 2024-12-02, delivery figures match"});
    CHECK(v.task_validations[1].status == Verdict::Invalid);
    CHECK(v.task_validations[1].confidence == Confidence::Medium);
    CHECK(v.task_validations[1].issues == std::vector<std::string>{"The 4% figure is 3% per the company release"});
    CHECK(v.summary_validation.task_id.empty());
    CHECK(v.summary_validation.status == Verdict::Valid);
    CHECK(v.summary_validation.confidence == Confidence::High);
    CHECK(parse_validation(format_validation(v)) == v);
  }

  TEST_CASE("validation status may carry a trailing remark") {
    auto v = parse_validation(replace_first(kValidationReply, "STATUS: INVALID", "STATUS: INVALID (figure mismatch)"));
    CHECK(v.task_validations[1].status == Verdict::Invalid);
  }

  TEST_CASE("validation mutations are rejected") {
    const std::string summary_block =
        "[SUMMARY VALIDATION]\nSTATUS: VALID\nCONFIDENCE: HIGH\nISSUES:\n- None\nEVIDENCE:\n- x\n[END SUMMARY VALIDATION]";
    const std::string bad[] = {
        drop_line(kValidationReply, "TASK ID: task2"),
        drop_line(kValidationReply, "CONFIDENCE: MEDIUM"),
        drop_line(kValidationReply, "[SUMMARY VALIDATION]"),
        drop_line(kValidationReply, "[END TASK VALIDATION]"),
        replace_first(kValidationReply, "STATUS: INVALID", "STATUS: MAYBE"),
        replace_first(kValidationReply, "CONFIDENCE: MEDIUM", "CONFIDENCE: SOMEWHAT"),
        replace_first(kValidationReply, "[SUMMARY VALIDATION]\nSTATUS", "[SUMMARY VALIDATION]\nTASK ID: s\nSTATUS"),
        kValidationReply + "\n\n" + summary_block,
        replace_first(kValidationReply, "CONFIDENCE: HIGH", "CONFIDENCE: HIGH\nCONFIDENCE: LOW"),
        "no blocks at all",
    };
    for (const auto& doc : bad) {
      CAPTURE(doc);
      CHECK(errc_of([&] { parse_validation(doc); }) == Errc::MalformedModelOutput);
    }
  }

  TEST_CASE("summarize re-prompts once on a malformed reply") {
    Fixture f;
    f.backend->respond("executor.summarize", "no markers", 1);
    f.backend->respond("executor.summarize", kSummaryReply);
    std::vector<ExecutionRecord> records = {{"t1", "llm", TaskStatus::Success, "answer", 0, 1}};
    auto s = f.ctx.config.max_parse_retries;
    CHECK(s == 2);
    auto summary = Summarizer(f.ctx).summarize("q", records, {"The 4% figure is wrong"});
    CHECK(summary.conclusion == "Momentum is positive but margin risk persists.");
    auto t = f.backend->transcript();
    REQUIRE(t.size() == 2);
    CHECK(t[0].request.user_prompt.find("- Task Result: answer") != std::string::npos);
    CHECK(t[0].request.user_prompt.find("- The 4% figure is wrong") != std::string::npos);
    CHECK(t[1].request.user_prompt.find("Your previous reply could not be used") != std::string::npos);
  }

  TEST_CASE("summarize gives up after the parse retry budget") {
    Fixture f;
    f.backend->respond("executor.summarize", "no markers");
    std::vector<ExecutionRecord> records = {{"t1", "llm", TaskStatus::Success, "answer", 0, 1}};
    CHECK(errc_of([&] { Summarizer(f.ctx).summarize("q", records); }) == Errc::MalformedModelOutput);
    CHECK(f.backend->call_count() == 3);
  }

  TEST_CASE("fact check sends the run date and the rendered summary") {
    Fixture f;
    f.config.run_date = parse_date("2024-12-02");
    f.backend->respond("executor.fact_check", kValidationReply);
    auto report = Summarizer(f.ctx).fact_check("q", "news_search", "content", parse_summary(kSummaryReply));
    CHECK(report == parse_validation(kValidationReply));
    auto t = f.backend->transcript();
    REQUIRE(t.size() == 1);
    CHECK(t[0].request.user_prompt.find("Date: 2024-12-02") != std::string::npos);
    CHECK(t[0].request.user_prompt.find("Source: news_search") != std::string::npos);
    CHECK(t[0].request.user_prompt.find("[SUMMARY]\nKEY FINDINGS:") != std::string::npos);
  }
}
