#include "deot/cli.hpp"

#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "deot/evalharness.hpp"
#include "deot/orchestrator.hpp"
#include "deot/run_record.hpp"
#include "deot/text.hpp"
#include "json.hpp"

namespace deot::cli {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& what) { throw Error(Errc::ConfigError, what); }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) config_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << content)) throw Error(Errc::IoError, "cannot write " + path.string());
}

BackendKind backend_kind(const std::string& name) {
  if (name == "scripted") return BackendKind::Scripted;
  if (name == "http") return BackendKind::Http;
  config_error("backend must be scripted or http, got \"" + name + "\"");
}

HttpBackendConfig http_config(const json& j) {
  HttpBackendConfig c;
  c.endpoint = j.value("endpoint", "");
  c.model = j.value("model", "");
  c.api_key_env = j.value("api_key_env", "");
  c.response_path = j.value("response_path", c.response_path);
  if (j.contains("timeout_seconds")) c.timeout = std::chrono::seconds(j.at("timeout_seconds").get<int>());
  if (j.contains("max_attempts")) c.retry.max_attempts = j.at("max_attempts").get<int>();
  if (j.contains("backoff_ms")) {
    c.retry.backoff.clear();
    for (const auto& ms : j.at("backoff_ms")) c.retry.backoff.emplace_back(ms.get<int>());
  }
  return c;
}

}  // namespace

Settings resolve_settings(const Flags& flags, const std::optional<std::string>& config_text) {
  Settings s;
  if (config_text) {
    json doc;
    try {
      doc = json::parse(*config_text);
    } catch (const json::exception& e) {
      config_error(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || doc.value("schema", "") != "deot.config/1") {
      config_error("config schema must be deot.config/1");
    }
    try {
      if (doc.contains("run")) {
        const auto& r = doc.at("run");
        s.run.max_layer = r.value("max_layer", s.run.max_layer);
        s.run.max_nodes = r.value("max_nodes", s.run.max_nodes);
        s.run.max_aspects = r.value("max_aspects", s.run.max_aspects);
        s.run.temperature = r.value("temperature", s.run.temperature);
        s.run.max_parse_retries = r.value("max_parse_retries", s.run.max_parse_retries);
        s.run.plan_retry_budget = r.value("plan_retry_budget", s.run.plan_retry_budget);
        if (r.contains("run_date")) s.run.run_date = parse_date(r.at("run_date").get<std::string>());
      }
      if (doc.contains("backend")) s.backend = backend_kind(doc.at("backend").get<std::string>());
      if (doc.contains("script")) s.script = doc.at("script").get<std::string>();
      if (doc.contains("out")) s.out = doc.at("out").get<std::string>();
      if (doc.contains("prompts")) s.prompts = doc.at("prompts").get<std::string>();
      if (doc.contains("http")) {
        for (const auto& [role, cfg] : doc.at("http").items()) {
          if (role != "reasoning" && role != "retrieval" && role != "judge") {
            config_error("unknown backend role \"" + role + "\"");
          }
          s.http[role] = http_config(cfg);
        }
      }
    } catch (const json::exception& e) {
      config_error(std::string("invalid config value: ") + e.what());
    } catch (const Error& e) {
      if (e.code() != Errc::ConfigError) config_error(e.detail());
      throw;
    }
  }

  if (flags.max_layers) s.run.max_layer = *flags.max_layers;
  if (flags.max_nodes) s.run.max_nodes = *flags.max_nodes;
  if (flags.max_aspects) s.run.max_aspects = *flags.max_aspects;
  if (flags.temperature) s.run.temperature = *flags.temperature;
  try {
    if (flags.run_date) s.run.run_date = parse_date(*flags.run_date);
    s.run.validate();
  } catch (const Error& e) {
    config_error(e.detail());
  }
  if (flags.backend) s.backend = backend_kind(*flags.backend);
  if (flags.script) s.script = *flags.script;
  if (flags.out) s.out = *flags.out;
  if (flags.prompts) s.prompts = *flags.prompts;
  return s;
}

namespace {

Settings settings_from(const Flags& flags) {
  std::optional<std::string> text;
  if (flags.config) text = read_file(*flags.config);
  return resolve_settings(flags, text);
}

std::shared_ptr<Backend> http_backend_for(const Settings& s, const std::string& role) {
  auto it = s.http.find(role);
  if (it == s.http.end()) it = s.http.find("reasoning");
  if (it == s.http.end()) config_error("http backend needs an http." + role + " or http.reasoning config section");
  try {
    return std::make_shared<HttpBackend>(it->second);
  } catch (const Error& e) {
    config_error(e.detail());
  }
}

std::shared_ptr<ScriptedBackend> scripted_backend(const std::filesystem::path& script) {
  if (script.empty()) config_error("the scripted backend requires a script file (--script)");
  try {
    return ScriptedBackend::from_file(script);
  } catch (const Error& e) {
    config_error(e.detail());
  }
}

BackendSet backends_for(const Settings& s) {
  if (s.backend == BackendKind::Scripted) return BackendSet::shared(scripted_backend(s.script));
  return {http_backend_for(s, "reasoning"), http_backend_for(s, "retrieval")};
}

TemplateStore templates_for(const Settings& s) {
  if (s.prompts.empty()) return TemplateStore::defaults();
  try {
    return TemplateStore::load_overrides(s.prompts, TemplateStore::defaults());
  } catch (const Error& e) {
    config_error(e.detail());
  }
}

void add_common(CLI::App& cmd, std::string& backend, std::string& script, std::string& config,
                std::string& prompts) {
  cmd.add_option("--config", config, "Configuration file (deot.config/1)");
  cmd.add_option("--backend", backend, "Backend: scripted or http");
  cmd.add_option("--script", script, "Script file for the scripted backend");
  cmd.add_option("--prompts", prompts, "Directory of prompt template overrides");
}

void apply_common(Flags& f, const std::string& backend, const std::string& script, const std::string& config,
                  const std::string& prompts) {
  if (!backend.empty()) f.backend = backend;
  if (!script.empty()) f.script = script;
  if (!config.empty()) f.config = config;
  if (!prompts.empty()) f.prompts = prompts;
}

void print_tree(const AnalysisTree& tree, std::ostream& out) {
  for (const auto& n : tree.nodes()) {
    out << std::string(static_cast<std::size_t>(2 * (n.layer - 1)), ' ') << to_string(n.id) << " [L" << n.layer
        << " " << to_string(n.origin) << ", " << to_string(n.status) << "] " << n.query << "\n";
  }
}

std::string transcript_document(const std::vector<TranscriptEntry>& entries) {
  auto list = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    list.push_back({{"tag", e.request.tag},
                    {"temperature", e.request.temperature},
                    {"system_prompt", e.request.system_prompt},
                    {"user_prompt", e.request.user_prompt},
                    {"response", e.response},
                    {"error", e.error}});
  }
  return nlohmann::ordered_json{{"schema", "deot.transcript/1"}, {"entries", list}}.dump(2) + "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dual-engine analysis pipeline: run analyses, build and judge N2Q sets, export run records."};
  app.require_subcommand(1);

  // run
  Flags run_flags;
  std::string query, run_backend, run_script, run_config, run_prompts, run_id;
  int max_layers = 0, max_nodes = 0, max_aspects = 0;
  double temperature = 0;
  std::string run_date, run_out;
  bool deterministic = false, parallel = false, transcript = false;
  auto* run_cmd = app.add_subcommand("run", "Analyze one query and write a run record");
  run_cmd->add_option("--query", query, "Query to analyze")->required();
  run_cmd->add_option("--max-layers", max_layers, "Maximum tree depth (root is layer 1)");
  run_cmd->add_option("--max-nodes", max_nodes, "Total node budget");
  run_cmd->add_option("--max-aspects", max_aspects, "Maximum children per breadth expansion");
  run_cmd->add_option("--temperature", temperature, "Sampling temperature for every request");
  run_cmd->add_option("--run-date", run_date, "Date given to the fact checker (YYYY-MM-DD)");
  run_cmd->add_option("--out", run_out, "Directory for run records");
  run_cmd->add_option("--run-id", run_id, "Explicit run id");
  run_cmd->add_flag("--deterministic", deterministic, "Derive the run id from the input and zero timestamps");
  run_cmd->add_flag("--parallel", parallel, "Run independent tasks of a plan concurrently");
  run_cmd->add_flag("--transcript", transcript, "Also write the model transcript next to the record");
  add_common(*run_cmd, run_backend, run_script, run_config, run_prompts);

  // eval
  Flags eval_flags;
  std::string questions, answers_a, answers_b, judge_backend, judge_script, eval_config, eval_prompts, eval_out,
      domains;
  auto* eval_cmd = app.add_subcommand("eval", "Judge two answer sets with the dual comparison test");
  eval_cmd->add_option("--questions", questions, "N2Q file")->required();
  eval_cmd->add_option("--answers-a", answers_a, "Answers of the system under test")->required();
  eval_cmd->add_option("--answers-b", answers_b, "Answers of the baseline")->required();
  eval_cmd->add_option("--judge-backend", judge_backend, "Judge backend: scripted or http");
  eval_cmd->add_option("--judge-script", judge_script, "Script file for a scripted judge");
  eval_cmd->add_option("--config", eval_config, "Configuration file (deot.config/1)");
  eval_cmd->add_option("--prompts", eval_prompts, "Directory of prompt template overrides");
  eval_cmd->add_option("--out", eval_out, "Results file");
  eval_cmd->add_option("--domains", domains, "Comma-separated domains to include");

  // n2q
  Flags n2q_flags;
  std::string corpus, n2q_out, n2q_backend, n2q_script, n2q_config, n2q_prompts;
  auto* n2q_cmd = app.add_subcommand("n2q", "Generate one question per corpus article");
  n2q_cmd->add_option("--corpus", corpus, "Corpus manifest (deot.corpus/1)")->required();
  n2q_cmd->add_option("--out", n2q_out, "N2Q output file")->required();
  add_common(*n2q_cmd, n2q_backend, n2q_script, n2q_config, n2q_prompts);

  // export
  std::string export_run, export_format = "dot";
  auto* export_cmd = app.add_subcommand("export", "Print a stored run as a graph or document");
  export_cmd->add_option("--run", export_run, "Run record file")->required();
  export_cmd->add_option("--format", export_format, "dot or doc")->check(CLI::IsMember({"dot", "doc"}));

  std::vector<std::string> argv_storage = {"deot"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (run_cmd->parsed()) {
      apply_common(run_flags, run_backend, run_script, run_config, run_prompts);
      if (run_cmd->count("--max-layers")) run_flags.max_layers = max_layers;
      if (run_cmd->count("--max-nodes")) run_flags.max_nodes = max_nodes;
      if (run_cmd->count("--max-aspects")) run_flags.max_aspects = max_aspects;
      if (run_cmd->count("--temperature")) run_flags.temperature = temperature;
      if (!run_date.empty()) run_flags.run_date = run_date;
      if (!run_out.empty()) run_flags.out = run_out;
      if (text::is_blank(query)) config_error("--query must not be empty");
      auto settings = settings_from(run_flags);
      auto backends = backends_for(settings);
      backends.reasoning->set_recording(transcript);
      if (backends.retrieval != backends.reasoning) backends.retrieval->set_recording(transcript);
      auto templates = templates_for(settings);
      auto registry = ToolRegistry::defaults();
      Orchestrator orchestrator(backends, templates, registry, settings.run, {deterministic, run_id, parallel});

      RunRecord record;
      try {
        record = orchestrator.run(query);
      } catch (const Error& e) {
        if (e.code() == Errc::ConfigError) throw;
        err << "run failed: " << e.what() << "\n";
        return 1;
      }
      if (transcript) {
        auto entries = backends.reasoning->transcript();
        if (backends.retrieval != backends.reasoning) {
          auto more = backends.retrieval->transcript();
          entries.insert(entries.end(), more.begin(), more.end());
        }
        record.transcript_ref = record.run_id + ".transcript.json";
        write_file(settings.out / record.transcript_ref, transcript_document(entries));
      }
      auto path = persist(record, settings.out);
      if (!record.succeeded()) {
        err << "root node failed: " << record.tree.root().failure << "\n";
        err << "run record: " << path.string() << "\n";
        return 1;
      }
      out << record.final_report << "\n\n";
      out << "Analysis tree (" << record.metrics.total_nodes << " nodes, depth " << record.metrics.max_depth
          << ", " << record.metrics.breadth_analyses << " breadth / " << record.metrics.depth_analyses
          << " depth expansions, stopped: " << to_string(record.termination.cause) << "):\n";
      print_tree(record.tree, out);
      for (const auto& w : record.warnings) err << "warning: " << w << "\n";
      out << "Run record: " << path.string() << "\n";
      return 0;
    }

    if (eval_cmd->parsed()) {
      if (!eval_config.empty()) eval_flags.config = eval_config;
      if (!eval_prompts.empty()) eval_flags.prompts = eval_prompts;
      if (!judge_backend.empty()) eval_flags.backend = judge_backend;
      if (!judge_script.empty()) eval_flags.script = judge_script;
      auto settings = settings_from(eval_flags);

      std::vector<N2QItem> items;
      std::vector<std::string> a, b;
      try {
        items = read_n2q_file(questions);
        a = read_answers_file(answers_a);
        b = read_answers_file(answers_b);
      } catch (const Error& e) {
        config_error(e.detail());
      }
      if (a.size() != items.size() || b.size() != items.size()) {
        config_error("answer files must hold one answer per question (" + std::to_string(items.size()) +
                     " questions, " + std::to_string(a.size()) + " and " + std::to_string(b.size()) + " answers)");
      }

      std::vector<Domain> columns(kDomains.begin(), kDomains.end());
      if (!domains.empty()) {
        columns.clear();
        std::string token;
        std::istringstream list(domains);
        while (std::getline(list, token, ',')) {
          auto d = domain_from_string(text::trim(token));
          if (!d) config_error("unknown domain \"" + token + "\"");
          columns.push_back(*d);
        }
        std::set<Domain> keep(columns.begin(), columns.end());
        std::vector<N2QItem> fi;
        std::vector<std::string> fa, fb;
        for (std::size_t i = 0; i < items.size(); ++i) {
          if (!keep.contains(items[i].domain)) continue;
          fi.push_back(items[i]);
          fa.push_back(a[i]);
          fb.push_back(b[i]);
        }
        items = std::move(fi);
        a = std::move(fa);
        b = std::move(fb);
      }

      std::shared_ptr<Backend> judge_backend_ptr =
          settings.backend == BackendKind::Scripted ? scripted_backend(settings.script) : http_backend_for(settings, "judge");
      auto templates = templates_for(settings);
      RunLog log;
      Judge judge(ModelContext{*judge_backend_ptr, templates, settings.run, &log});
      auto results = evaluate(judge, items, a, b);
      auto table = aggregate(results.verdicts);
      out << render_table(table, columns);
      out << "\nJudged " << results.verdicts.size() << " question(s), rejected " << results.rejected.size() << "\n";
      for (const auto& r : results.rejected) err << "rejected question " << r.index << ": " << r.reason << "\n";
      if (!eval_out.empty()) write_file(eval_out, results_document(results, table));
      return 0;
    }

    if (n2q_cmd->parsed()) {
      apply_common(n2q_flags, n2q_backend, n2q_script, n2q_config, n2q_prompts);
      auto settings = settings_from(n2q_flags);
      std::vector<CorpusArticle> articles;
      try {
        articles = read_corpus_manifest(corpus);
      } catch (const Error& e) {
        config_error(e.detail());
      }
      std::vector<std::pair<CorpusArticle, std::string>> texts;
      for (const auto& article : articles) {
        if (!std::filesystem::exists(article.file)) config_error("corpus file missing: " + article.file.string());
        texts.emplace_back(article, read_file(article.file));
      }
      auto backends = backends_for(settings);
      auto templates = templates_for(settings);
      RunLog log;
      ModelContext ctx{*backends.reasoning, templates, settings.run, &log};
      std::vector<N2QItem> items;
      int skipped = 0;
      for (const auto& [article, news] : texts) {
        try {
          items.push_back({generate_question(ctx, news), article.domain, article.file.filename().string()});
        } catch (const Error& e) {
          if (e.code() == Errc::ConfigError) throw;
          ++skipped;
          err << "warning: skipped " << article.file.string() << ": " << e.what() << "\n";
        }
      }
      write_file(n2q_out, n2q_document(items));
      out << "Generated " << items.size() << " question(s), skipped " << skipped << "\n";
      return 0;
    }

    if (export_cmd->parsed()) {
      RunRecord record;
      try {
        record = load(export_run);
      } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
      }
      out << export_graph(record, export_format == "dot" ? GraphFormat::Dot : GraphFormat::StructuredDocument);
      return 0;
    }
  } catch (const Error& e) {
    if (e.code() == Errc::ConfigError || e.code() == Errc::InvalidInput) {
      err << "error: " << e.what() << "\n";
      return 2;
    }
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace deot::cli
