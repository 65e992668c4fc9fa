#include <cctype>
#include <random>
#include <set>

#include "doctest.h"
#include "documents.hpp"
#include "expect.hpp"
#include "deot/engine.hpp"

using namespace deot;
using namespace deot::testing;

namespace {

struct Fixture {
  RunConfig config;
  RunLog log;
  std::shared_ptr<ScriptedBackend> backend = std::make_shared<ScriptedBackend>();
  ModelContext ctx{*backend, TemplateStore::defaults(), config, &log};
  Engine engine{ctx};
  Fixture() { backend->set_recording(true); }
};

EngineContext context(int layer = 1) {
  return {"Impact of port closures?", "Impact of port closures?", layer, 3, "Summary of findings."};
}

// Dedupe on normalised query, then three passes HIGH, MEDIUM, LOW, then cap.
std::vector<BreadthAspect> select_oracle(const std::vector<BreadthAspect>& in, int cap) {
  auto norm = [](const std::string& s) {
    std::string out;
    bool space = false;
    for (char c : s) {
      if (std::isspace(static_cast<unsigned char>(c))) {
        space = !out.empty();
        continue;
      }
      if (space) out += ' ';
      space = false;
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
  };
  std::vector<BreadthAspect> unique;
  std::set<std::string> seen;
  for (const auto& a : in) {
    if (seen.insert(norm(a.query)).second) unique.push_back(a);
  }
  std::vector<BreadthAspect> out;
  for (auto p : {Priority::High, Priority::Medium, Priority::Low}) {
    for (const auto& a : unique) {
      if (a.priority == p && static_cast<int>(out.size()) < cap) out.push_back(a);
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("engine") {
  TEST_CASE("controller decision golden") {
    auto d = parse_controller_decision(kControllerReply);
    CHECK(d == ControllerDecision{ExpansionKind::Breadth, "multiple unexplored aspects", 1});
    CHECK(parse_controller_decision(format_controller_decision(d)) == d);
    auto depth = parse_controller_decision("Thinking it over.\nDecision: DEPTH\nReasoning: one thread\nLayer: 2\n");
    CHECK(depth.decision == ExpansionKind::Depth);
    CHECK(depth.layer == 2);
  }

  TEST_CASE("controller tokens outside the closed set are rejected") {
    for (const char* token : {"WIDE", "breadth", "BREADTH/DEPTH", "URGENT", ""}) {
      CAPTURE(token);
      auto doc = replace_first(kControllerReply, "BREADTH", token);
      CHECK(errc_of([&] { parse_controller_decision(doc); }) == Errc::MalformedModelOutput);
    }
    CHECK(errc_of([] { parse_controller_decision(drop_line(kControllerReply, "Reasoning")); }) ==
          Errc::MalformedModelOutput);
    CHECK(errc_of([] { parse_controller_decision(replace_first(kControllerReply, "Layer: 1", "Layer: one")); }) ==
          Errc::MalformedModelOutput);
    CHECK(errc_of([] { parse_controller_decision(kControllerReply + "\nDecision: DEPTH"); }) ==
          Errc::MalformedModelOutput);
  }

  TEST_CASE("breadth aspects golden") {
    auto aspects = parse_breadth_aspects(kBreadthReply);
    REQUIRE(aspects.size() == 3);
    CHECK(aspects[0] == BreadthAspect{"Supply chains", "Economic", "Factories depend on the affected ports",
                                      "How will port closures affect chip supply chains?", Priority::Medium});
    CHECK(aspects[1].priority == Priority::High);
    CHECK(aspects[2].priority == Priority::Low);
    CHECK(parse_breadth_aspects(format_breadth_aspects(aspects)) == aspects);
  }

  TEST_CASE("breadth mutations are rejected") {
    CHECK(errc_of([] { parse_breadth_aspects(replace_first(kBreadthReply, "Priority: HIGH", "Priority: URGENT")); }) ==
          Errc::MalformedModelOutput);
    CHECK(errc_of([] { parse_breadth_aspects(drop_line(kBreadthReply, "Category: Political")); }) ==
          Errc::MalformedModelOutput);
    CHECK(errc_of([] { parse_breadth_aspects(drop_line(kBreadthReply, "Aspect: Supply chains")); }) ==
          Errc::MalformedModelOutput);
    CHECK(errc_of([] { parse_breadth_aspects("Nothing useful here."); }) == Errc::MalformedModelOutput);
  }

  TEST_CASE("depth question golden and rejection of two questions") {
    auto q = parse_depth_question(kDepthReply);
    CHECK(q.question == "How would a prolonged port closure change chip inventory strategies?");
    CHECK(q.priority == Priority::High);
    CHECK(parse_depth_question(format_depth_question(q)) == q);
    CHECK(errc_of([] { parse_depth_question(kDepthReply + "\nQuestion: And another?"); }) == Errc::MalformedModelOutput);
    CHECK(errc_of([] { parse_depth_question(drop_line(kDepthReply, "Priority")); }) == Errc::MalformedModelOutput);
  }

  TEST_CASE("aspect selection matches the oracle on random inputs") {
    std::mt19937 rng(17);
    const char* queries[] = {"Q one?", "q  ONE?", "Q two?", "Q three?", "Q four?", "Q five?"};
    for (int trial = 0; trial < 3000; ++trial) {
      std::vector<BreadthAspect> in;
      int n = 1 + static_cast<int>(rng() % 7);
      for (int i = 0; i < n; ++i) {
        in.push_back({"a" + std::to_string(i), "c", "r", queries[rng() % 6], static_cast<Priority>(rng() % 3)});
      }
      int cap = 1 + static_cast<int>(rng() % 4);
      std::vector<std::string> warnings;
      auto got = select_aspects(in, cap, warnings);
      auto expected = select_oracle(in, cap);
      CHECK(got == expected);
      CHECK(got.size() <= static_cast<std::size_t>(cap));
      for (std::size_t i = 1; i < got.size(); ++i) CHECK(got[i - 1].priority <= got[i].priority);
    }
  }

  TEST_CASE("selection reports duplicates and truncation") {
    auto aspects = parse_breadth_aspects(kBreadthReply);
    aspects.push_back(aspects[0]);
    aspects.back().query = "  how will PORT closures affect chip supply chains? ";
    std::vector<std::string> warnings;
    auto kept = select_aspects(aspects, 2, warnings);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].aspect == "Diplomatic fallout");
    CHECK(kept[1].aspect == "Supply chains");
    REQUIRE(warnings.size() == 2);
    CHECK(warnings[0].find("duplicate") != std::string::npos);
    CHECK(warnings[1].find("kept 2") != std::string::npos);
  }

  TEST_CASE("decide sends the node context and trusts its own layer") {
    Fixture f;
    f.backend->respond("engine.controller", "Decision: DEPTH\nReasoning: r\nLayer: 1");
    auto d = f.engine.decide(context(2));
    CHECK(d.decision == ExpansionKind::Depth);
    CHECK(d.layer == 2);
    REQUIRE(f.log.warnings().size() == 1);
    CHECK(f.log.warnings()[0].find("layer 1 at layer 2") != std::string::npos);
    auto t = f.backend->transcript();
    REQUIRE(t.size() == 1);
    CHECK(t[0].request.user_prompt.find("2") != std::string::npos);
    CHECK(t[0].request.user_prompt.find("Summary of findings.") != std::string::npos);
  }

  TEST_CASE("engine calls re-prompt on malformed output then give up") {
    Fixture f;
    f.backend->respond("engine.controller", "Decision: WIDE\nReasoning: r\nLayer: 1", 1);
    f.backend->respond("engine.controller", kControllerReply);
    CHECK(f.engine.decide(context()).decision == ExpansionKind::Breadth);
    CHECK(f.backend->call_count() == 2);

    Fixture g;
    g.backend->respond("engine.depth", "Question: a?\nQuestion: b?\nReasoning: r\nPriority: LOW");
    CHECK(errc_of([&] { g.engine.expand_depth(context()); }) == Errc::MalformedModelOutput);
    CHECK(g.backend->call_count() == 3);
  }

  TEST_CASE("expand_breadth caps and warns") {
    Fixture f;
    f.backend->respond("engine.breadth", kBreadthReply);
    auto kept = f.engine.expand_breadth(context(), 1);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].aspect == "Diplomatic fallout");
    CHECK(f.log.warnings().size() == 1);
    CHECK(f.backend->transcript()[0].request.user_prompt.find("1") != std::string::npos);
  }

  TEST_CASE("engine context validation") {
    Fixture f;
    auto ec = context();
    ec.current_layer = 4;
    CHECK(errc_of([&] { f.engine.decide(ec); }) == Errc::InvalidInput);
    ec = context();
    ec.content = " ";
    CHECK(errc_of([&] { f.engine.expand_depth(ec); }) == Errc::InvalidInput);
    CHECK(f.backend->call_count() == 0);
  }
}
