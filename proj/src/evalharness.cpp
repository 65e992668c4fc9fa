#include "deot/evalharness.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "deot/text.hpp"
#include "json.hpp"

namespace deot {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void malformed(const std::string& what) { throw Error(Errc::MalformedModelOutput, what); }

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ordered_json parse_document(const std::filesystem::path& path, std::string_view schema) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedFile, path.string() + " is not valid JSON: " + e.what());
  }
  if (!doc.is_object() || doc.value("schema", "") != schema) {
    throw Error(Errc::VersionMismatch, path.string() + " must carry schema " + std::string(schema));
  }
  return doc;
}

Domain domain_field(const ordered_json& j) {
  auto d = domain_from_string(j.at("domain").get<std::string>());
  if (!d) throw Error(Errc::MalformedFile, "unknown domain " + j.at("domain").dump());
  return *d;
}

TableRow row_of(Criterion c) {
  switch (c) {
    case Criterion::AnalyticalDepth: return TableRow::AnalyticalDepth;
    case Criterion::SpecificArguments: return TableRow::SpecificArguments;
    case Criterion::Innovation: return TableRow::Innovation;
    case Criterion::Practicality: return TableRow::Practicality;
    case Criterion::LogicalCoherence: return TableRow::LogicalCoherence;
  }
  return TableRow::TotalWinRate;
}

}  // namespace

std::string_view to_string(Domain d) noexcept {
  switch (d) {
    case Domain::Biomedicine: return "Biomedicine";
    case Domain::Economics: return "Economics";
    case Domain::Geopolitics: return "Geopolitics";
    case Domain::Industry: return "Industry";
    case Domain::Technology: return "Technology";
  }
  return "?";
}

std::optional<Domain> domain_from_string(std::string_view s) noexcept {
  auto lowered = text::to_lower(text::trim(s));
  for (auto d : kDomains) {
    if (text::to_lower(to_string(d)) == lowered) return d;
  }
  return std::nullopt;
}

std::string_view criterion_key(Criterion c) noexcept {
  switch (c) {
    case Criterion::AnalyticalDepth: return "analytical_depth";
    case Criterion::SpecificArguments: return "specific_arguments";
    case Criterion::Innovation: return "innovation";
    case Criterion::Practicality: return "practicality";
    case Criterion::LogicalCoherence: return "logical_coherence";
  }
  return "?";
}

std::string_view criterion_title(Criterion c) noexcept { return row_title(row_of(c)); }

std::string_view to_string(Ordering o) noexcept { return o == Ordering::AFirst ? "AFirst" : "BFirst"; }
std::string_view to_string(ModelLabel l) noexcept { return l == ModelLabel::ModelA ? "model_a" : "model_b"; }
std::string_view to_string(System s) noexcept { return s == System::A ? "A" : "B"; }

std::optional<ModelLabel> model_label_from_string(std::string_view s) noexcept {
  if (s == "model_a") return ModelLabel::ModelA;
  if (s == "model_b") return ModelLabel::ModelB;
  return std::nullopt;
}

ModelLabel flip(ModelLabel l) noexcept { return l == ModelLabel::ModelA ? ModelLabel::ModelB : ModelLabel::ModelA; }
System other(System s) noexcept { return s == System::A ? System::B : System::A; }

System derotate(ModelLabel label, Ordering ordering) noexcept {
  bool first = label == ModelLabel::ModelA;
  if (ordering == Ordering::BFirst) first = !first;
  return first ? System::A : System::B;
}

ModelLabel rotate(System system, Ordering ordering) noexcept {
  bool shown_first = (system == System::A) == (ordering == Ordering::AFirst);
  return shown_first ? ModelLabel::ModelA : ModelLabel::ModelB;
}

RawJudgement parse_judge_output(std::string_view completion) {
  auto body = text::extract_balanced(text::strip_code_fences(completion), '{');
  if (!body) malformed("no JSON object in judge output");
  json doc;
  try {
    doc = json::parse(*body);
  } catch (const json::exception& e) {
    malformed(std::string("judge output is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("criteria") || !doc.at("criteria").is_object()) {
    malformed("judge output lacks the criteria object");
  }
  const auto& criteria = doc.at("criteria");
  if (criteria.size() != kCriteria.size()) malformed("judge output must rate exactly five criteria");

  auto label = [](const json& v, const std::string& where) {
    if (!v.is_string()) malformed(where + " winner must be a string");
    auto l = model_label_from_string(v.get<std::string>());
    if (!l) malformed(where + " winner must be model_a or model_b, got " + v.dump());
    return *l;
  };

  RawJudgement raw;
  for (std::size_t i = 0; i < kCriteria.size(); ++i) {
    auto key = std::string(criterion_key(kCriteria[i]));
    if (!criteria.contains(key)) malformed("judge output lacks criterion " + key);
    const auto& c = criteria.at(key);
    if (!c.is_object() || !c.contains("winner")) malformed("criterion " + key + " lacks a winner");
    if (!c.contains("reason") || !c.at("reason").is_string()) malformed("criterion " + key + " lacks a reason");
    raw.criteria[i] = {label(c.at("winner"), key), c.at("reason").get<std::string>()};
  }
  if (!doc.contains("overall_winner")) malformed("judge output lacks overall_winner");
  raw.overall_winner = label(doc.at("overall_winner"), "overall");
  return raw;
}

std::string format_judge_output(const RawJudgement& j) {
  ordered_json criteria = ordered_json::object();
  for (std::size_t i = 0; i < kCriteria.size(); ++i) {
    criteria[std::string(criterion_key(kCriteria[i]))] = {{"winner", to_string(j.criteria[i].first)},
                                                          {"reason", j.criteria[i].second}};
  }
  ordered_json doc = {{"criteria", criteria}, {"overall_winner", to_string(j.overall_winner)}};
  return doc.dump(4);
}

RoundVerdict derotate(const RawJudgement& raw, Ordering ordering) {
  RoundVerdict v;
  v.ordering = ordering;
  for (std::size_t i = 0; i < kCriteria.size(); ++i) {
    v.criteria[i] = {derotate(raw.criteria[i].first, ordering), raw.criteria[i].second};
  }
  v.overall_winner = derotate(raw.overall_winner, ordering);
  return v;
}

RoundVerdict swap_systems(const RoundVerdict& v) {
  RoundVerdict out = v;
  for (auto& c : out.criteria) c.winner = other(c.winner);
  out.overall_winner = other(v.overall_winner);
  return out;
}

std::string parse_question_line(std::string_view completion) {
  for (auto line : text::split_lines(completion)) {
    if (auto v = text::field_value(line, "Question")) {
      if (v->empty()) malformed("Question line is empty");
      return std::string(*v);
    }
  }
  malformed("no \"Question:\" line in generator output");
}

RoundVerdict Judge::judge_round(std::string_view question, std::string_view first_answer,
                                std::string_view second_answer, Ordering ordering) const {
  if (text::is_blank(first_answer) || text::is_blank(second_answer)) {
    throw Error(Errc::InvalidInput, "both answers are required for judging");
  }
  auto completion = ctx_.call("eval.judge", {{"question", std::string(question)},
                                             {"model_a_response", std::string(first_answer)},
                                             {"model_b_response", std::string(second_answer)}});
  return derotate(parse_judge_output(completion), ordering);
}

std::pair<RoundVerdict, RoundVerdict> Judge::dual_comparison(std::string_view question, std::string_view answer_a,
                                                             std::string_view answer_b) const {
  auto first = judge_round(question, answer_a, answer_b, Ordering::AFirst);
  auto second = judge_round(question, answer_b, answer_a, Ordering::BFirst);
  return {std::move(first), std::move(second)};
}

std::string generate_question(const ModelContext& ctx, std::string_view news) {
  if (text::is_blank(news)) throw Error(Errc::InvalidInput, "news text is empty");
  return parse_question_line(ctx.call("n2q.question", {{"news", std::string(news)}}));
}

std::string baseline_answer(const ModelContext& ctx, std::string_view question) {
  if (text::is_blank(question)) throw Error(Errc::InvalidInput, "question is empty");
  return ctx.call("eval.system", {{"query", std::string(question)}});
}

EvalResults evaluate(const Judge& judge, const std::vector<N2QItem>& items, const std::vector<std::string>& answers_a,
                     const std::vector<std::string>& answers_b) {
  if (answers_a.size() != items.size() || answers_b.size() != items.size()) {
    throw Error(Errc::InvalidInput, "expected " + std::to_string(items.size()) + " answers per system, got " +
                                        std::to_string(answers_a.size()) + " and " + std::to_string(answers_b.size()));
  }
  EvalResults results;
  for (std::size_t i = 0; i < items.size(); ++i) {
    try {
      results.verdicts.push_back(
          {i, items[i].domain, items[i].question, judge.dual_comparison(items[i].question, answers_a[i], answers_b[i])});
    } catch (const Error& e) {
      if (e.code() == Errc::ConfigError) throw;
      results.rejected.push_back({i, e.what()});
    }
  }
  return results;
}

std::optional<double> WinRateCell::rate() const {
  if (questions == 0) return std::nullopt;
  // Computed from the smaller side so a cell and its mirror sum to exactly 100.
  auto share = [&](int points) { return 100.0 * points / (2.0 * questions); };
  return points_a <= points_b ? share(points_a) : 100.0 - share(points_b);
}

std::string_view row_title(TableRow r) noexcept {
  switch (r) {
    case TableRow::TotalWinRate: return "Total Win Rate";
    case TableRow::AnalyticalDepth: return "Analytical Depth";
    case TableRow::Innovation: return "Innovation";
    case TableRow::LogicalCoherence: return "Logical Coherence";
    case TableRow::SpecificArguments: return "Specific Arguments";
    case TableRow::Practicality: return "Practicality";
  }
  return "?";
}

WinRateCell WinRateTable::cell(TableRow row, std::optional<Domain> domain) const {
  const std::map<TableRow, WinRateCell>* rows = &overall;
  if (domain) {
    auto it = by_domain.find(*domain);
    if (it == by_domain.end()) return {};
    rows = &it->second;
  }
  auto it = rows->find(row);
  return it == rows->end() ? WinRateCell{} : it->second;
}

WinRateTable aggregate(const std::vector<QuestionVerdicts>& verdicts) {
  WinRateTable table;
  auto credit = [](WinRateCell& cell, System winner) { (winner == System::A ? cell.points_a : cell.points_b) += 1; };
  for (const auto& q : verdicts) {
    for (auto* rows : {&table.by_domain[q.domain], &table.overall}) {
      for (auto row : kTableRows) ++(*rows)[row].questions;
      for (const auto* round : {&q.rounds.first, &q.rounds.second}) {
        credit((*rows)[TableRow::TotalWinRate], round->overall_winner);
        for (auto c : kCriteria) credit((*rows)[row_of(c)], (*round)[c].winner);
      }
    }
  }
  return table;
}

std::string render_table(const WinRateTable& table, const std::vector<Domain>& columns) {
  auto format_rate = [](const WinRateCell& c) -> std::string {
    auto r = c.rate();
    if (!r) return "-";
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.1f", *r);
    return buf;
  };
  std::vector<std::string> headers = {"Evaluation Criteria"};
  for (auto d : columns) headers.emplace_back(to_string(d));
  headers.emplace_back("Overall");

  std::vector<std::vector<std::string>> rows;
  for (auto row : kTableRows) {
    std::vector<std::string> cells = {std::string(row_title(row))};
    for (auto d : columns) cells.push_back(format_rate(table.cell(row, d)));
    cells.push_back(format_rate(table.cell(row)));
    rows.push_back(std::move(cells));
  }

  std::vector<std::size_t> width(headers.size());
  for (std::size_t i = 0; i < headers.size(); ++i) {
    width[i] = headers[i].size();
    for (const auto& r : rows) width[i] = std::max(width[i], r[i].size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += " | ";
      auto pad = width[i] - cells[i].size();
      out += i == 0 ? cells[i] + std::string(pad, ' ') : std::string(pad, ' ') + cells[i];
    }
    return out + "\n";
  };
  std::string rule;
  for (std::size_t i = 0; i < width.size(); ++i) {
    if (i) rule += "-+-";
    rule += std::string(width[i], '-');
  }
  rule += "\n";

  std::string out = line(headers) + rule;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out += line(rows[i]);
    if (i == 0) out += rule;
  }
  return out;
}

std::vector<N2QItem> read_n2q_file(const std::filesystem::path& path) {
  auto doc = parse_document(path, "deot.n2q/1");
  std::vector<N2QItem> items;
  try {
    for (const auto& j : doc.at("items")) {
      N2QItem item{j.at("question").get<std::string>(), domain_field(j), j.value("source_ref", "")};
      if (text::is_blank(item.question)) throw Error(Errc::MalformedFile, "N2Q item with empty question");
      items.push_back(std::move(item));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedFile, path.string() + ": malformed N2Q item: " + e.what());
  }
  return items;
}

std::string n2q_document(const std::vector<N2QItem>& items) {
  ordered_json list = ordered_json::array();
  for (const auto& i : items) {
    list.push_back({{"question", i.question}, {"domain", to_string(i.domain)}, {"source_ref", i.source_ref}});
  }
  return ordered_json{{"schema", "deot.n2q/1"}, {"items", list}}.dump(2) + "\n";
}

std::vector<std::string> read_answers_file(const std::filesystem::path& path) {
  auto doc = parse_document(path, "deot.answers/1");
  try {
    return doc.at("answers").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedFile, path.string() + ": answers must be a list of strings: " + e.what());
  }
}

std::string answers_document(const std::vector<std::string>& answers) {
  return ordered_json{{"schema", "deot.answers/1"}, {"answers", answers}}.dump(2) + "\n";
}

std::string results_document(const EvalResults& results, const WinRateTable& table) {
  auto round_doc = [](const RoundVerdict& v) {
    ordered_json criteria = ordered_json::object();
    for (auto c : kCriteria) {
      criteria[std::string(criterion_key(c))] = {{"winner", to_string(v[c].winner)}, {"reason", v[c].reason}};
    }
    return ordered_json{{"ordering", to_string(v.ordering)},
                        {"criteria", criteria},
                        {"overall_winner", to_string(v.overall_winner)}};
  };
  auto cell_doc = [](const WinRateCell& c) {
    ordered_json j = {{"points_a", c.points_a}, {"points_b", c.points_b}, {"questions", c.questions}};
    auto r = c.rate();
    j["rate"] = r ? ordered_json(*r) : ordered_json(nullptr);
    return j;
  };
  auto rows_doc = [&](auto lookup) {
    ordered_json j = ordered_json::object();
    for (auto row : kTableRows) j[std::string(row_title(row))] = cell_doc(lookup(row));
    return j;
  };

  ordered_json verdicts = ordered_json::array();
  for (const auto& q : results.verdicts) {
    verdicts.push_back({{"index", q.index},
                        {"domain", to_string(q.domain)},
                        {"question", q.question},
                        {"rounds", {round_doc(q.rounds.first), round_doc(q.rounds.second)}}});
  }
  ordered_json rejected = ordered_json::array();
  for (const auto& r : results.rejected) rejected.push_back({{"index", r.index}, {"reason", r.reason}});

  ordered_json domains = ordered_json::object();
  for (const auto& [d, rows] : table.by_domain) {
    domains[std::string(to_string(d))] = rows_doc([&, d = d](TableRow row) { return table.cell(row, d); });
  }
  ordered_json doc = {
      {"schema", "deot.eval/1"},
      {"verdicts", verdicts},
      {"rejected", rejected},
      {"table", {{"domains", domains}, {"overall", rows_doc([&](TableRow row) { return table.cell(row); })}}},
  };
  return doc.dump(2) + "\n";
}

std::vector<CorpusArticle> read_corpus_manifest(const std::filesystem::path& path) {
  auto doc = parse_document(path, "deot.corpus/1");
  std::vector<CorpusArticle> out;
  try {
    for (const auto& j : doc.at("articles")) {
      auto file = j.at("file").get<std::string>();
      if (file.empty()) throw Error(Errc::MalformedFile, "corpus entry without a file");
      out.push_back({path.parent_path() / file, domain_field(j)});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedFile, path.string() + ": malformed corpus entry: " + e.what());
  }
  return out;
}

}  // namespace deot
