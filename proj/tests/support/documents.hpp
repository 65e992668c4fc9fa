#pragma once

#include <string>
#include <vector>

// Canonical model replies for each output grammar, shared by unit and acceptance tests.
namespace deot::testing {

inline const std::string kOptimizeReply = R"({
  "optimized_query": "What is Tesla (TSLA) stock's current performance in December 2024?",
  "original_query": "How's TSLA doing?",
  "modifications": [
    "Added full company name",
    "Added time context",
    "Specified stock performance metric"
  ]
})";

inline const std::string kRecoveryReply = R"({
  "optimized_query": "What is Tesla (TSLA) stock's current performance in December 2024?",
  "original_query": "How's TSLA doing?",
  "modifications": [
    "Added full company name",
    "Added time context",
    "Specified stock performance metric"
  ],
  "error_handling": {
    "original_error": "JSON parsing error in previous response",
    "correction_explanation": "Fixed JSON format and added missing required fields",
    "previous_attempt_analysis": "Previous attempt failed due to malformed JSON structure"
  }
})";

inline const std::string kPlanReply = R"([{
  "task": "Search for recent news about Tesla stock performance",
  "id": "task1",
  "name": "news_search",
  "input": "Tesla stock price performance,3",
  "reason": "To gather recent information about Tesla stock trends",
  "dep": []
}, {
  "task": "Extract the key events from the retrieved articles",
  "id": "task2",
  "name": "event_extractor",
  "input": "Key events in the Tesla news",
  "reason": "Turns articles into a list of events",
  "dep": ["task1"]
}])";

inline const std::string kSummaryReply = R"([SUMMARY]
KEY FINDINGS:
Tesla shares rose in December on delivery expectations.

EVIDENCE AND DATA:
- Deliveries beat estimates by 4%
- Shares closed up 3% on the week
- Analysts raised price targets

ANALYSIS:
Demand signals improved after the price cuts.

Margins remain under pressure.

CONFLICTING INFORMATION:
- Conflict 1: one outlet reports flat deliveries
(Skip if none found)

CONCLUSION:
Momentum is positive but margin risk persists.
[END SUMMARY])";

inline const std::string kValidationReply = R"([TASK VALIDATION]
TASK ID: task1
STATUS: VALID
CONFIDENCE: HIGH
ISSUES:
- None
EVIDENCE:
- Reuters, 2024-12-02, delivery figures match
[END TASK VALIDATION]

[TASK VALIDATION]
TASK ID: task2
STATUS: INVALID
CONFIDENCE: MEDIUM
ISSUES:
- The 4% figure is 3% per the company release
EVIDENCE:
- Company release, 2024-12-01
[END TASK VALIDATION]

[SUMMARY VALIDATION]
STATUS: VALID
CONFIDENCE: HIGH
ISSUES:
- None
EVIDENCE:
- Cross-checked with task results
[END SUMMARY VALIDATION])";

inline const std::string kControllerReply = "Decision: BREADTH\nReasoning: multiple unexplored aspects\nLayer: 1";

inline const std::string kBreadthReply = R"(Aspect: Supply chains
Category: Economic
Reasoning: Factories depend on the affected ports
Query: How will port closures affect chip supply chains?
Priority: MEDIUM

Aspect: Diplomatic fallout
Category: Political
Reasoning: Allies must respond
Query: How will allied governments respond diplomatically?
Priority: HIGH

Aspect: Consumer prices
Category: Social
Reasoning: Costs pass through to households
Query: Will consumer electronics prices rise?
Priority: LOW)";

inline const std::string kDepthReply =
    "Question: How would a prolonged port closure change chip inventory strategies?\n"
    "Reasoning: Inventory buffers decide how long production can continue\n"
    "Priority: HIGH";

inline const std::string kJudgeReply = R"({
    "criteria": {
        "analytical_depth": {"winner": "model_a", "reason": "Deeper causal analysis"},
        "specific_arguments": {"winner": "model_b", "reason": "More statistics"},
        "innovation": {"winner": "model_a", "reason": "Novel framework"},
        "practicality": {"winner": "model_b", "reason": "More feasible"},
        "logical_coherence": {"winner": "model_a", "reason": "Clearer structure"}
    },
    "overall_winner": "model_a"
})";

inline const std::string kQuestionReply =
    "Question: Given that a major chipmaker paused exports, how might regional supply chains adapt over the next year?";

/// Removes the first line containing `needle` (and nothing else).
std::string drop_line(const std::string& doc, const std::string& needle);
/// Replaces the first occurrence of `from`.
std::string replace_first(const std::string& doc, const std::string& from, const std::string& to);

}  // namespace deot::testing
