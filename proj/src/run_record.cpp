#include "deot/run_record.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace deot {

namespace {

using nlohmann::ordered_json;

[[noreturn]] void malformed(const std::string& what) { throw Error(Errc::MalformedFile, what); }

ordered_json config_doc(const RunConfig& c) {
  return {{"max_layer", c.max_layer},
          {"max_nodes", c.max_nodes},
          {"max_aspects", c.max_aspects},
          {"temperature", c.temperature},
          {"max_parse_retries", c.max_parse_retries},
          {"plan_retry_budget", c.plan_retry_budget},
          {"run_date", format_date(c.run_date)}};
}

RunConfig config_from(const ordered_json& j) {
  RunConfig c;
  c.max_layer = j.at("max_layer").get<int>();
  c.max_nodes = j.at("max_nodes").get<int>();
  c.max_aspects = j.at("max_aspects").get<int>();
  c.temperature = j.at("temperature").get<double>();
  c.max_parse_retries = j.at("max_parse_retries").get<int>();
  c.plan_retry_budget = j.at("plan_retry_budget").get<int>();
  c.run_date = parse_date(j.at("run_date").get<std::string>());
  return c;
}

ordered_json entry_doc(const ValidationEntry& e) {
  ordered_json j;
  if (!e.task_id.empty()) j["task_id"] = e.task_id;
  j["status"] = to_string(e.status);
  j["confidence"] = to_string(e.confidence);
  j["issues"] = e.issues;
  j["evidence"] = e.evidence;
  return j;
}

ValidationEntry entry_from(const ordered_json& j) {
  ValidationEntry e;
  e.task_id = j.value("task_id", "");
  auto status = verdict_from_string(j.at("status").get<std::string>());
  auto confidence = confidence_from_string(j.at("confidence").get<std::string>());
  if (!status || !confidence) malformed("invalid validation entry");
  e.status = *status;
  e.confidence = *confidence;
  e.issues = j.at("issues").get<std::vector<std::string>>();
  e.evidence = j.at("evidence").get<std::vector<std::string>>();
  return e;
}

ordered_json answer_doc(const NodeAnswer& a) {
  ordered_json tasks = ordered_json::array();
  for (const auto& r : a.raw_task_records) {
    tasks.push_back({{"task_id", r.task_id},
                     {"task_name", r.task_name},
                     {"status", to_string(r.status)},
                     {"result", r.result},
                     {"started", r.started},
                     {"finished", r.finished}});
  }
  ordered_json task_validations = ordered_json::array();
  for (const auto& t : a.validation.task_validations) task_validations.push_back(entry_doc(t));
  return {{"summary_sections",
           {{"key_findings", a.summary.key_findings},
            {"evidence", a.summary.evidence},
            {"analysis", a.summary.analysis},
            {"conflicts", a.summary.conflicts},
            {"conclusion", a.summary.conclusion},
            {"raw", a.summary.raw}}},
          {"validation", {{"tasks", task_validations}, {"summary", entry_doc(a.validation.summary_validation)}}},
          {"task_records", tasks},
          {"flags", a.flags}};
}

NodeAnswer answer_from(const ordered_json& j) {
  NodeAnswer a;
  const auto& s = j.at("summary_sections");
  a.summary.key_findings = s.at("key_findings").get<std::string>();
  a.summary.evidence = s.at("evidence").get<std::vector<std::string>>();
  a.summary.analysis = s.at("analysis").get<std::string>();
  a.summary.conflicts = s.at("conflicts").get<std::vector<std::string>>();
  a.summary.conclusion = s.at("conclusion").get<std::string>();
  a.summary.raw = s.at("raw").get<std::string>();
  for (const auto& t : j.at("validation").at("tasks")) a.validation.task_validations.push_back(entry_from(t));
  a.validation.summary_validation = entry_from(j.at("validation").at("summary"));
  for (const auto& r : j.at("task_records")) {
    ExecutionRecord rec;
    rec.task_id = r.at("task_id").get<std::string>();
    rec.task_name = r.at("task_name").get<std::string>();
    auto status = task_status_from_string(r.at("status").get<std::string>());
    if (!status) malformed("invalid task status");
    rec.status = *status;
    rec.result = r.at("result").get<std::string>();
    rec.started = r.at("started").get<int>();
    rec.finished = r.at("finished").get<int>();
    a.raw_task_records.push_back(std::move(rec));
  }
  a.flags = j.at("flags").get<std::vector<std::string>>();
  return a;
}

NodeId node_id_from(const ordered_json& j) {
  auto id = node_id_from_string(j.get<std::string>());
  if (!id) malformed("invalid node id " + j.dump());
  return *id;
}

}  // namespace

std::string to_document(const RunRecord& r) {
  ordered_json nodes = ordered_json::array();
  ordered_json failed = ordered_json::array();
  for (const auto& n : r.tree.nodes()) {
    ordered_json node = {{"id", to_string(n.id)},
                         {"layer", n.layer},
                         {"parent", n.parent ? ordered_json(to_string(*n.parent)) : ordered_json(nullptr)},
                         {"origin", to_string(n.origin)},
                         {"status", to_string(n.status)},
                         {"query", n.query}};
    ordered_json children = ordered_json::array();
    for (auto c : n.children) children.push_back(to_string(c));
    node["children"] = children;
    node["answer"] = n.answer ? answer_doc(*n.answer) : ordered_json(nullptr);
    node["failure"] = n.failure;
    nodes.push_back(std::move(node));
    if (n.status == NodeStatus::Failed) failed.push_back({{"id", to_string(n.id)}, {"query", n.query}, {"reason", n.failure}});
  }

  ordered_json optimized = {{"optimized_query", r.optimized.optimized_query},
                            {"original_query", r.optimized.original_query},
                            {"modifications", r.optimized.modifications}};
  if (r.optimized.error_handling) {
    optimized["error_handling"] = {{"original_error", r.optimized.error_handling->original_error},
                                   {"correction_explanation", r.optimized.error_handling->correction_explanation},
                                   {"previous_attempt_analysis", r.optimized.error_handling->previous_attempt_analysis}};
  }

  ordered_json doc = {
      {"schema", kRunRecordSchema},
      {"run_id", r.run_id},
      {"config", config_doc(r.config)},
      {"root_query", r.root_query},
      {"optimized_query", optimized},
      {"nodes", nodes},
      {"counters",
       {{"breadth_expansions", r.tree.breadth_expansions()}, {"depth_expansions", r.tree.depth_expansions()}}},
      {"metrics",
       {{"total_nodes", r.metrics.total_nodes},
        {"max_depth", r.metrics.max_depth},
        {"breadth_analyses", r.metrics.breadth_analyses},
        {"depth_analyses", r.metrics.depth_analyses}}},
      {"termination", {{"should_stop", r.termination.should_stop}, {"cause", to_string(r.termination.cause)}}},
      {"final_report", r.final_report},
      {"failed_nodes", failed},
      {"warnings", r.warnings},
      {"transcript_ref", r.transcript_ref},
      {"timestamps", {{"started_at", r.started_at}, {"finished_at", r.finished_at}}},
  };
  return doc.dump(2) + "\n";
}

RunRecord from_document(std::string_view document) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(document);
  } catch (const nlohmann::json::exception& e) {
    malformed(std::string("run record is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("schema")) malformed("run record has no schema tag");
  if (doc.at("schema") != kRunRecordSchema) {
    throw Error(Errc::VersionMismatch, "unsupported run record schema " + doc.at("schema").dump());
  }

  RunRecord r;
  try {
    r.run_id = doc.at("run_id").get<std::string>();
    r.config = config_from(doc.at("config"));
    r.root_query = doc.at("root_query").get<std::string>();
    const auto& o = doc.at("optimized_query");
    r.optimized.optimized_query = o.at("optimized_query").get<std::string>();
    r.optimized.original_query = o.at("original_query").get<std::string>();
    r.optimized.modifications = o.at("modifications").get<std::vector<std::string>>();
    if (o.contains("error_handling")) {
      const auto& eh = o.at("error_handling");
      r.optimized.error_handling = ErrorHandling{eh.at("original_error").get<std::string>(),
                                                 eh.at("correction_explanation").get<std::string>(),
                                                 eh.at("previous_attempt_analysis").get<std::string>()};
    }

    std::vector<AnalysisNode> nodes;
    for (const auto& j : doc.at("nodes")) {
      AnalysisNode n;
      n.id = node_id_from(j.at("id"));
      n.layer = j.at("layer").get<int>();
      if (!j.at("parent").is_null()) n.parent = node_id_from(j.at("parent"));
      auto origin = node_origin_from_string(j.at("origin").get<std::string>());
      auto status = node_status_from_string(j.at("status").get<std::string>());
      if (!origin || !status) malformed("invalid node origin or status");
      n.origin = *origin;
      n.status = *status;
      n.query = j.at("query").get<std::string>();
      for (const auto& c : j.at("children")) n.children.push_back(node_id_from(c));
      if (!j.at("answer").is_null()) n.answer = answer_from(j.at("answer"));
      n.failure = j.at("failure").get<std::string>();
      nodes.push_back(std::move(n));
    }
    const auto& counters = doc.at("counters");
    r.tree = AnalysisTree::restore(std::move(nodes), counters.at("breadth_expansions").get<int>(),
                                   counters.at("depth_expansions").get<int>());

    const auto& m = doc.at("metrics");
    r.metrics = {m.at("total_nodes").get<int>(), m.at("max_depth").get<int>(), m.at("breadth_analyses").get<int>(),
                 m.at("depth_analyses").get<int>()};
    const auto& t = doc.at("termination");
    auto cause = termination_cause_from_string(t.at("cause").get<std::string>());
    if (!cause) malformed("invalid termination cause");
    r.termination = {t.at("should_stop").get<bool>(), *cause};
    r.final_report = doc.at("final_report").get<std::string>();
    r.warnings = doc.at("warnings").get<std::vector<std::string>>();
    r.transcript_ref = doc.at("transcript_ref").get<std::string>();
    r.started_at = doc.at("timestamps").at("started_at").get<std::string>();
    r.finished_at = doc.at("timestamps").at("finished_at").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    malformed(std::string("malformed run record: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::InvalidInput) malformed("malformed run record: " + e.detail());
    throw;
  }
  if (r.metrics != metrics_of(r.tree)) malformed("run record metrics disagree with its tree");
  return r;
}

std::filesystem::path persist(const RunRecord& record, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoError, "cannot create " + dir.string() + ": " + ec.message());
  auto path = dir / (record.run_id + ".json");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << to_document(record);
  if (!out) throw Error(Errc::IoError, "write to " + path.string() + " failed");
  return path;
}

RunRecord load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open run record " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_document(buf.str());
}

std::string export_graph(const RunRecord& record, GraphFormat format) {
  return format == GraphFormat::Dot ? to_dot(record.tree) : to_document(record);
}

}  // namespace deot
