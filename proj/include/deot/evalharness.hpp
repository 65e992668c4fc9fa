#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "deot/context.hpp"

namespace deot {

enum class Domain { Biomedicine, Economics, Geopolitics, Industry, Technology };
inline constexpr std::array<Domain, 5> kDomains = {Domain::Biomedicine, Domain::Economics, Domain::Geopolitics,
                                                   Domain::Industry, Domain::Technology};
std::string_view to_string(Domain d) noexcept;
/// Case-insensitive.
std::optional<Domain> domain_from_string(std::string_view s) noexcept;

enum class Criterion { AnalyticalDepth, SpecificArguments, Innovation, Practicality, LogicalCoherence };
inline constexpr std::array<Criterion, 5> kCriteria = {Criterion::AnalyticalDepth, Criterion::SpecificArguments,
                                                       Criterion::Innovation, Criterion::Practicality,
                                                       Criterion::LogicalCoherence};
/// JSON key used by the judge, e.g. "analytical_depth".
std::string_view criterion_key(Criterion c) noexcept;
/// Display name, e.g. "Analytical Depth".
std::string_view criterion_title(Criterion c) noexcept;

enum class Ordering { AFirst, BFirst };
std::string_view to_string(Ordering o) noexcept;

/// Position label the judge sees.
enum class ModelLabel { ModelA, ModelB };
/// System identity: A is the system under test.
enum class System { A, B };

std::string_view to_string(ModelLabel l) noexcept;
std::optional<ModelLabel> model_label_from_string(std::string_view s) noexcept;
std::string_view to_string(System s) noexcept;

ModelLabel flip(ModelLabel l) noexcept;
System other(System s) noexcept;
/// Maps the judge's positional label back to the system shown in that position.
System derotate(ModelLabel label, Ordering ordering) noexcept;
/// Inverse of derotate: the label under which `system` was shown.
ModelLabel rotate(System system, Ordering ordering) noexcept;

struct N2QItem {
  std::string question;
  Domain domain = Domain::Economics;
  std::string source_ref;

  bool operator==(const N2QItem&) const = default;
};

struct RawJudgement {
  std::array<std::pair<ModelLabel, std::string>, 5> criteria;  // indexed like kCriteria
  ModelLabel overall_winner = ModelLabel::ModelA;

  bool operator==(const RawJudgement&) const = default;
};

struct CriterionVerdict {
  System winner = System::A;
  std::string reason;

  bool operator==(const CriterionVerdict&) const = default;
};

struct RoundVerdict {
  Ordering ordering = Ordering::AFirst;
  std::array<CriterionVerdict, 5> criteria;  // indexed like kCriteria
  System overall_winner = System::A;

  const CriterionVerdict& operator[](Criterion c) const { return criteria[static_cast<std::size_t>(c)]; }
  bool operator==(const RoundVerdict&) const = default;
};

/// Parses the judge's JSON: all five criteria with model_a/model_b winners
/// and an overall winner. Throws Error(MalformedModelOutput).
RawJudgement parse_judge_output(std::string_view completion);
std::string format_judge_output(const RawJudgement& j);
RoundVerdict derotate(const RawJudgement& raw, Ordering ordering);
/// Swaps A and B everywhere in the verdict.
RoundVerdict swap_systems(const RoundVerdict& v);

/// Parses "Question: ..." from the generator's reply. Throws Error(MalformedModelOutput).
std::string parse_question_line(std::string_view completion);

class Judge {
 public:
  explicit Judge(ModelContext ctx) : ctx_(ctx) {}

  /// One judged round; `first_answer` is shown as Model A.
  RoundVerdict judge_round(std::string_view question, std::string_view first_answer,
                           std::string_view second_answer, Ordering ordering) const;
  /// Round one shows A first, round two shows B first.
  std::pair<RoundVerdict, RoundVerdict> dual_comparison(std::string_view question, std::string_view answer_a,
                                                        std::string_view answer_b) const;

 private:
  ModelContext ctx_;
};

std::string generate_question(const ModelContext& ctx, std::string_view news);
/// Answer from a plain single-prompt system, used for baseline answer files.
std::string baseline_answer(const ModelContext& ctx, std::string_view question);

struct QuestionVerdicts {
  std::size_t index = 0;
  Domain domain = Domain::Economics;
  std::string question;
  std::pair<RoundVerdict, RoundVerdict> rounds;

  bool operator==(const QuestionVerdicts&) const = default;
};

struct Rejection {
  std::size_t index = 0;
  std::string reason;

  bool operator==(const Rejection&) const = default;
};

struct EvalResults {
  std::vector<QuestionVerdicts> verdicts;
  std::vector<Rejection> rejected;  // questions whose judging failed in either round
};

/// Judges every question. Sizes must match or Error(InvalidInput) is thrown.
EvalResults evaluate(const Judge& judge, const std::vector<N2QItem>& items, const std::vector<std::string>& answers_a,
                     const std::vector<std::string>& answers_b);

struct WinRateCell {
  int points_a = 0;
  int points_b = 0;
  int questions = 0;

  /// points_a / (2 * questions) as a percentage; empty for a cell without data.
  std::optional<double> rate() const;
  bool operator==(const WinRateCell&) const = default;
};

/// Table rows in display order.
enum class TableRow { TotalWinRate, AnalyticalDepth, Innovation, LogicalCoherence, SpecificArguments, Practicality };
inline constexpr std::array<TableRow, 6> kTableRows = {TableRow::TotalWinRate,     TableRow::AnalyticalDepth,
                                                       TableRow::Innovation,       TableRow::LogicalCoherence,
                                                       TableRow::SpecificArguments, TableRow::Practicality};
std::string_view row_title(TableRow r) noexcept;

struct WinRateTable {
  std::map<Domain, std::map<TableRow, WinRateCell>> by_domain;  // only domains with data
  std::map<TableRow, WinRateCell> overall;

  /// Cell for a domain, or the overall column when `domain` is empty.
  WinRateCell cell(TableRow row, std::optional<Domain> domain = std::nullopt) const;
  bool operator==(const WinRateTable&) const = default;
};

WinRateTable aggregate(const std::vector<QuestionVerdicts>& verdicts);

/// Criteria rows by domain columns plus Overall; cells without data show "-".
std::string render_table(const WinRateTable& table, const std::vector<Domain>& columns = {kDomains.begin(), kDomains.end()});

// Documents exchanged by the CLI.
std::vector<N2QItem> read_n2q_file(const std::filesystem::path& path);
std::string n2q_document(const std::vector<N2QItem>& items);
std::vector<std::string> read_answers_file(const std::filesystem::path& path);
std::string answers_document(const std::vector<std::string>& answers);
std::string results_document(const EvalResults& results, const WinRateTable& table);

struct CorpusArticle {
  std::filesystem::path file;
  Domain domain = Domain::Economics;
};
/// Manifest {"schema":"deot.corpus/1","articles":[{file, domain}]}, file paths
/// relative to the manifest. Throws MalformedFile or IoError.
std::vector<CorpusArticle> read_corpus_manifest(const std::filesystem::path& path);

}  // namespace deot
