#include <random>

#include "doctest.h"
#include "documents.hpp"
#include "expect.hpp"
#include "json.hpp"
#include "deot/evalharness.hpp"

using namespace deot;
using namespace deot::testing;

namespace {

struct Fixture {
  RunConfig config;
  RunLog log;
  std::shared_ptr<ScriptedBackend> backend = std::make_shared<ScriptedBackend>();
  ModelContext ctx{*backend, TemplateStore::defaults(), config, &log};
  Judge judge{ctx};
  Fixture() { backend->set_recording(true); }
};

RoundVerdict random_round(std::mt19937& rng, Ordering ordering) {
  RoundVerdict v;
  v.ordering = ordering;
  for (auto& c : v.criteria) c = {rng() % 2 ? System::A : System::B, "r"};
  v.overall_winner = rng() % 2 ? System::A : System::B;
  return v;
}

std::vector<QuestionVerdicts> random_verdicts(std::mt19937& rng, std::size_t n) {
  std::vector<QuestionVerdicts> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto domain = kDomains[rng() % kDomains.size()];
    out.push_back({i, domain, "q", {random_round(rng, Ordering::AFirst), random_round(rng, Ordering::BFirst)}});
  }
  return out;
}

// Points for A in one row over the questions of a domain (or all).
WinRateCell oracle_cell(const std::vector<QuestionVerdicts>& vs, TableRow row, std::optional<Domain> domain) {
  WinRateCell cell;
  for (const auto& q : vs) {
    if (domain && q.domain != *domain) continue;
    ++cell.questions;
    for (const auto* r : {&q.rounds.first, &q.rounds.second}) {
      System w = System::A;
      switch (row) {
        case TableRow::TotalWinRate: w = r->overall_winner; break;
        case TableRow::AnalyticalDepth: w = r->criteria[0].winner; break;
        case TableRow::SpecificArguments: w = r->criteria[1].winner; break;
        case TableRow::Innovation: w = r->criteria[2].winner; break;
        case TableRow::Practicality: w = r->criteria[3].winner; break;
        case TableRow::LogicalCoherence: w = r->criteria[4].winner; break;
      }
      (w == System::A ? cell.points_a : cell.points_b) += 1;
    }
  }
  return cell;
}

}  // namespace

TEST_SUITE("evalharness") {
  TEST_CASE("judge output golden") {
    auto raw = parse_judge_output(kJudgeReply);
    CHECK(raw.criteria[0] == std::pair{ModelLabel::ModelA, std::string("Deeper causal analysis")});
    CHECK(raw.criteria[1].first == ModelLabel::ModelB);
    CHECK(raw.criteria[3].first == ModelLabel::ModelB);
    CHECK(raw.criteria[4].second == "Clearer structure");
    CHECK(raw.overall_winner == ModelLabel::ModelA);
    CHECK(parse_judge_output(format_judge_output(raw)) == raw);
  }

  TEST_CASE("judge output mutations are rejected") {
    auto base = nlohmann::json::parse(kJudgeReply);
    for (auto c : kCriteria) {
      auto key = std::string(criterion_key(c));
      CAPTURE(key);
      auto dropped = base;
      dropped["criteria"].erase(key);
      CHECK(errc_of([&] { parse_judge_output(dropped.dump()); }) == Errc::MalformedModelOutput);
      auto tie = base;
      tie["criteria"][key]["winner"] = "tie";
      CHECK(errc_of([&] { parse_judge_output(tie.dump()); }) == Errc::MalformedModelOutput);
      auto no_reason = base;
      no_reason["criteria"][key].erase("reason");
      CHECK(errc_of([&] { parse_judge_output(no_reason.dump()); }) == Errc::MalformedModelOutput);
    }
    auto extra = base;
    extra["criteria"]["style"] = {{"winner", "model_a"}, {"reason", "x"}};
    CHECK(errc_of([&] { parse_judge_output(extra.dump()); }) == Errc::MalformedModelOutput);
    auto no_overall = base;
    no_overall.erase("overall_winner");
    CHECK(errc_of([&] { parse_judge_output(no_overall.dump()); }) == Errc::MalformedModelOutput);
    CHECK(errc_of([] { parse_judge_output("model_a wins"); }) == Errc::MalformedModelOutput);
  }

  TEST_CASE("label de-rotation") {
    CHECK(derotate(ModelLabel::ModelA, Ordering::AFirst) == System::A);
    CHECK(derotate(ModelLabel::ModelB, Ordering::AFirst) == System::B);
    CHECK(derotate(ModelLabel::ModelA, Ordering::BFirst) == System::B);
    CHECK(derotate(ModelLabel::ModelB, Ordering::BFirst) == System::A);
    for (auto o : {Ordering::AFirst, Ordering::BFirst}) {
      for (auto s : {System::A, System::B}) CHECK(derotate(rotate(s, o), o) == s);
      for (auto l : {ModelLabel::ModelA, ModelLabel::ModelB}) CHECK(rotate(derotate(l, o), o) == l);
    }
    auto raw = parse_judge_output(kJudgeReply);
    CHECK(swap_systems(derotate(raw, Ordering::AFirst)).criteria == derotate(raw, Ordering::BFirst).criteria);
  }

  TEST_CASE("dual comparison swaps positions in the second round") {
    Fixture f;
    f.backend->respond("eval.judge", kJudgeReply);
    auto [first, second] = f.judge.dual_comparison("Q?", "ANSWER-A", "ANSWER-B");
    auto t = f.backend->transcript();
    REQUIRE(t.size() == 2);
    auto pos = [](const std::string& p, const char* s) { return p.find(s); };
    CHECK(pos(t[0].request.user_prompt, "ANSWER-A") < pos(t[0].request.user_prompt, "ANSWER-B"));
    CHECK(pos(t[1].request.user_prompt, "ANSWER-B") < pos(t[1].request.user_prompt, "ANSWER-A"));
    CHECK(first.ordering == Ordering::AFirst);
    CHECK(second.ordering == Ordering::BFirst);
    CHECK(first.overall_winner == System::A);
    CHECK(second.overall_winner == System::B);
    CHECK(first[Criterion::SpecificArguments].winner == System::B);
    CHECK(second[Criterion::SpecificArguments].winner == System::A);
  }

  TEST_CASE("a malformed second round rejects the question") {
    Fixture f;
    f.backend->respond("eval.judge", kJudgeReply, 1);
    f.backend->respond("eval.judge", "no verdict", 1);
    f.backend->respond("eval.judge", kJudgeReply);
    std::vector<N2QItem> items = {{"Q1?", Domain::Economics, ""}, {"Q2?", Domain::Technology, ""}};
    auto results = evaluate(f.judge, items, {"a1", "a2"}, {"b1", "b2"});
    REQUIRE(results.rejected.size() == 1);
    CHECK(results.rejected[0].index == 0);
    CHECK(results.rejected[0].reason.find("MalformedModelOutput") != std::string::npos);
    REQUIRE(results.verdicts.size() == 1);
    CHECK(results.verdicts[0].index == 1);
    CHECK(f.backend->call_count() == 4);
    auto table = aggregate(results.verdicts);
    CHECK(table.cell(TableRow::TotalWinRate).questions == 1);
    CHECK_FALSE(table.cell(TableRow::TotalWinRate, Domain::Economics).rate());
  }

  TEST_CASE("answer list sizes must match the questions") {
    Fixture f;
    std::vector<N2QItem> items = {{"Q1?", Domain::Economics, ""}};
    CHECK(errc_of([&] { evaluate(f.judge, items, {"a"}, {}); }) == Errc::InvalidInput);
    CHECK(f.backend->call_count() == 0);
  }

  TEST_CASE("aggregation matches a per-cell recount") {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 200; ++trial) {
      auto vs = random_verdicts(rng, rng() % 12);
      auto table = aggregate(vs);
      for (auto row : kTableRows) {
        CHECK(table.cell(row) == oracle_cell(vs, row, std::nullopt));
        for (auto d : kDomains) {
          auto expected = oracle_cell(vs, row, d);
          CHECK(table.cell(row, d) == expected);
          CHECK(table.by_domain.contains(d) == (expected.questions > 0));
        }
      }
    }
  }

  TEST_CASE("swapping systems mirrors every cell") {
    std::mt19937 rng(29);
    for (int trial = 0; trial < 200; ++trial) {
      auto vs = random_verdicts(rng, 1 + rng() % 10);
      auto mirrored = vs;
      for (auto& q : mirrored) q.rounds = {swap_systems(q.rounds.first), swap_systems(q.rounds.second)};
      auto t = aggregate(vs), m = aggregate(mirrored);
      for (auto row : kTableRows) {
        auto a = t.cell(row), b = m.cell(row);
        CHECK(a.points_a == b.points_b);
        CHECK(a.points_b == b.points_a);
        CHECK(a.points_a + a.points_b == 2 * a.questions);
        CHECK(*a.rate() + *b.rate() == 100.0);
      }
    }
  }

  TEST_CASE("rate is points over twice the questions") {
    CHECK(WinRateCell{3, 1, 2}.rate() == doctest::Approx(75.0));
    CHECK_FALSE(WinRateCell{}.rate());
  }

  TEST_CASE("table rendering shows absent domains as dashes") {
    std::vector<QuestionVerdicts> vs;
    RoundVerdict all_a;
    all_a.overall_winner = System::A;
    vs.push_back({0, Domain::Economics, "q", {all_a, all_a}});
    auto text = render_table(aggregate(vs));
    auto lines = std::vector<std::string>();
    std::size_t start = 0;
    for (auto p = text.find('\n'); p != std::string::npos; start = p + 1, p = text.find('\n', start)) {
      lines.push_back(text.substr(start, p - start));
    }
    REQUIRE(lines.size() == 9);
    CHECK(lines[0].find("Evaluation Criteria") == 0);
    CHECK(lines[0].find("Overall") != std::string::npos);
    CHECK(lines[2].find("Total Win Rate") == 0);
    CHECK(lines[4].find("Analytical Depth") == 0);
    CHECK(lines[8].find("Practicality") == 0);
    // Biomedicine empty, Economics 100.0, Geopolitics/Industry/Technology empty, Overall 100.0.
    auto cells = [](const std::string& line) {
      std::vector<std::string> out;
      std::size_t s = 0;
      for (auto p = line.find(" | "); ; p = line.find(" | ", s)) {
        auto cell = line.substr(s, p == std::string::npos ? std::string::npos : p - s);
        while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
        while (!cell.empty() && cell.back() == ' ') cell.pop_back();
        out.push_back(cell);
        if (p == std::string::npos) break;
        s = p + 3;
      }
      return out;
    };
    CHECK(cells(lines[2]) == std::vector<std::string>{"Total Win Rate", "-", "100.0", "-", "-", "-", "100.0"});
  }

  TEST_CASE("question generation and baseline answers") {
    Fixture f;
    f.backend->respond("n2q.question", kQuestionReply);
    f.backend->respond("eval.system", "Baseline answer.");
    CHECK(generate_question(f.ctx, "Chipmaker pauses exports.").rfind("Given that", 0) == 0);
    CHECK(baseline_answer(f.ctx, "Q?") == "Baseline answer.");
    CHECK(errc_of([] { parse_question_line("Here is a question for you"); }) == Errc::MalformedModelOutput);
  }

  TEST_CASE("documents round-trip through files") {
    TempDir dir;
    std::vector<N2QItem> items = {{"Q1?", Domain::Biomedicine, "a.txt"}, {"Q2?", Domain::Industry, ""}};
    auto n2q = dir.write("n2q.json", n2q_document(items));
    CHECK(read_n2q_file(n2q) == items);
    auto answers = dir.write("answers.json", answers_document({"x", "y"}));
    CHECK(read_answers_file(answers) == std::vector<std::string>{"x", "y"});
    dir.write("bad.json", R"({"schema":"deot.answers/2","answers":[]})");
    CHECK(errc_of([&] { read_answers_file(dir.path() / "bad.json"); }) == Errc::VersionMismatch);
    dir.write("domain.json", R"({"schema":"deot.n2q/1","items":[{"question":"q","domain":"Sports"}]})");
    CHECK(errc_of([&] { read_n2q_file(dir.path() / "domain.json"); }) == Errc::MalformedFile);
    CHECK(errc_of([&] { read_n2q_file(dir.path() / "missing.json"); }) == Errc::IoError);
    auto corpus = dir.write("corpus/manifest.json",
                            R"({"schema":"deot.corpus/1","articles":[{"file":"a.txt","domain":"economics"}]})");
    auto articles = read_corpus_manifest(corpus);
    REQUIRE(articles.size() == 1);
    CHECK(articles[0].file == dir.path() / "corpus" / "a.txt");
    CHECK(articles[0].domain == Domain::Economics);
  }

  TEST_CASE("results document lists rejected questions and null rates") {
    EvalResults results;
    results.rejected.push_back({3, "judge failed"});
    auto doc = nlohmann::json::parse(results_document(results, aggregate({})));
    CHECK(doc["schema"] == "deot.eval/1");
    CHECK(doc["rejected"][0]["index"] == 3);
    CHECK(doc["table"]["overall"]["Total Win Rate"]["rate"].is_null());
  }
}
