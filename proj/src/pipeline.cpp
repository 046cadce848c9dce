#include "clinkg/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "clinkg/corpus.hpp"
#include "clinkg/errors.hpp"
#include "clinkg/evaluation.hpp"
#include "clinkg/fixture_backend.hpp"
#include "clinkg/http_backends.hpp"
#include "clinkg/text.hpp"

namespace clinkg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

HttpEndpoint endpoint(const std::string& url, const std::string& token_env, int timeout_ms) {
  HttpEndpoint e;
  e.base_url = url;
  if (!token_env.empty()) {
    if (const char* token = std::getenv(token_env.c_str())) e.bearer_token = token;
  }
  e.timeout = std::chrono::milliseconds(timeout_ms);
  return e;
}

}  // namespace

Runtime::Runtime(PipelineConfig config)
    : config_(std::move(config)),
      stopwords_(config_.stopwords.empty() ? WordList::builtin_stopwords() : WordList::from_file(config_.stopwords)),
      refusals_(config_.refusals.empty() ? WordList::builtin_refusals() : WordList::from_file(config_.refusals)),
      templates_(config_.templates.empty() ? TemplateSet::builtin() : TemplateSet::from_file(config_.templates)) {
  validate(config_);
  hash_ = clinkg::config_hash(config_);

  if (config_.similarity.provider == "remote") {
    const auto& s = config_.similarity;
    similarity_ = std::make_unique<RemoteEmbeddingProvider>(endpoint(s.url, s.token_env, s.timeout_ms));
  } else {
    similarity_ = std::make_unique<TrigramProvider>();
  }

  const auto& n = config_.ner;
  if (n.provider == "lexicon") ner_ = std::make_unique<LexiconNerProvider>(n.terms);
  else if (n.provider == "remote") ner_ = std::make_unique<RemoteNerProvider>(endpoint(n.url, n.token_env, n.timeout_ms));
  else ner_ = std::make_unique<NullNerProvider>();

  if (!config_.alias_table.empty()) aliases_ = AliasTable::from_file(config_.alias_table);
  if (!config_.guided_template.empty()) guided_template_ = text::read_file(config_.guided_template);
}

PromptOptions Runtime::prompt_options() const {
  PromptOptions p;
  p.style = config_.prompt_style;
  p.exemplars = config_.exemplars;
  p.guided_template = guided_template_;
  return p;
}

RetryPolicy Runtime::retry_policy() const {
  RetryPolicy r;
  r.max_attempts = static_cast<int>(config_.retry_budget);
  r.base_delay = std::chrono::milliseconds(config_.retry_base_delay_ms);
  r.sleep = sleep_;
  return r;
}

ResponseOptions Runtime::response_options() const {
  ResponseOptions o;
  o.default_score = config_.default_answer_score;
  o.max_free_text_words = config_.max_free_text_words;
  o.refusals = &refusals_;
  return o;
}

std::unique_ptr<ModelBackend> Runtime::make_backend(std::string_view name) const {
  const BackendConfig& b = select_backend(config_, name);
  if (b.type == "fixture") {
    json script;
    try {
      script = json::parse(text::read_file(b.script));
    } catch (const json::exception& e) {
      throw InputError(b.script, 0, std::string("malformed fixture script: ") + e.what());
    }
    if (!script.contains("name")) script["name"] = b.name;
    return std::make_unique<FixtureBackend>(script);
  }
  const auto ep = endpoint(b.url, b.token_env, b.timeout_ms);
  if (b.type == "http_qa") return std::make_unique<HttpQaBackend>(b.name, ep, static_cast<int>(config_.top_k));
  return std::make_unique<HttpGenerativeBackend>(b.name, ep, b.max_tokens, b.temperature);
}

std::string_view to_string(StageManifest::Status status) {
  switch (status) {
    case StageManifest::Status::Ok: return "ok";
    case StageManifest::Status::Incomplete: return "incomplete";
    case StageManifest::Status::Failed: return "failed";
  }
  return "?";
}

json to_json(const StageManifest& m, const std::string& config_hash) {
  json j = {{"v", 1},
            {"stage", m.stage},
            {"status", to_string(m.status)},
            {"config_hash", config_hash},
            {"inputs", m.inputs},
            {"outputs", m.outputs},
            {"backends", m.backends},
            {"counts", m.counts},
            {"warnings", m.warnings},
            {"failures", m.failures}};
  if (!m.error.empty()) j["error"] = m.error;
  return j;
}

namespace {

void write_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out << content;
    if (!out.flush()) throw Error("cannot write " + tmp);
  }
  fs::rename(tmp, target);
}

void write_manifest(const Runtime& rt, const StageManifest& m, const std::string& artifact) {
  write_atomic(artifact + ".manifest.json", to_json(m, rt.config_hash()).dump(2) + "\n");
}

template <typename Body>
StageManifest guarded(const Runtime& rt, const std::string& stage, const StageRequest& req, Body body) {
  StageManifest m;
  m.stage = stage;
  if (!req.in.empty()) m.inputs.push_back(req.in);
  m.outputs.push_back(req.out);
  try {
    body(m);
  } catch (const std::exception& e) {
    m.status = StageManifest::Status::Failed;
    m.error = e.what();
    try {
      write_manifest(rt, m, req.out);
    } catch (...) {
    }
    throw;
  }
  write_manifest(rt, m, req.out);
  return m;
}

std::vector<std::string> diseases_for(const Runtime& rt, const StageRequest& req) {
  const auto& list = req.diseases.empty() ? rt.config().diseases : req.diseases;
  if (list.empty()) throw ValidationError("diseases", "no disease given (config \"diseases\" or --disease)");
  return list;
}

json read_json_file(const std::string& path) {
  const std::string content = text::read_file(path);
  try {
    return json::parse(content);
  } catch (const json::exception& e) {
    throw InputError(path, 0, e.what());
  }
}

void check_artifact(const json& doc, const std::string& path) {
  if (!doc.is_object() || doc.value("v", 0) != 1) throw InputError(path, 0, "not a version 1 artifact");
}

std::string replace_extension(const std::string& path, const std::string& ext) {
  return fs::path(path).replace_extension(ext).string();
}

}  // namespace

Corpus read_corpus(const std::string& path) { return ingest_notes(path, format_for_path(path)); }

NoteIndexFile read_note_index(const std::string& path) {
  const json doc = read_json_file(path);
  check_artifact(doc, path);
  NoteIndexFile out;
  try {
    for (const auto& d : doc.at("diseases")) {
      const auto disease = d.at("disease").get<std::string>();
      out.diseases.push_back(disease);
      auto& notes = out.notes[disease];
      for (const auto& n : d.at("notes")) {
        std::optional<std::string> date;
        if (n.contains("date") && !n["date"].is_null()) date = n["date"].get<std::string>();
        notes.emplace_back(n.at("id").get<std::string>(), n.at("text").get<std::string>(), date);
      }
    }
  } catch (const json::exception& e) {
    throw InputError(path, 0, e.what());
  }
  return out;
}

RelationsFile read_relations(const std::string& path) {
  const json doc = read_json_file(path);
  check_artifact(doc, path);
  RelationsFile out;
  try {
    out.diseases = doc.at("diseases").get<std::vector<std::string>>();
    for (const auto& r : doc.at("relations")) out.relations.push_back(relation_from_json(r));
  } catch (const std::exception& e) {
    throw InputError(path, 0, e.what());
  }
  return out;
}

StageManifest run_ingest(const Runtime& rt, const StageRequest& req) {
  return guarded(rt, "ingest", req, [&](StageManifest& m) {
    const Corpus corpus = read_corpus(req.in);
    std::ostringstream out;
    write_jsonl(corpus, out);
    write_atomic(req.out, out.str());
    m.counts["notes"] = corpus.size();
  });
}

StageManifest run_preprocess(const Runtime& rt, const StageRequest& req) {
  return guarded(rt, "preprocess", req, [&](StageManifest& m) {
    const Corpus corpus = read_corpus(req.in);
    PreprocessOptions options;
    options.threshold = rt.config().threshold_preprocessing;
    options.min_words = rt.config().min_words;
    const auto result = preprocess(corpus, rt.similarity(), options);
    std::ostringstream out;
    write_jsonl(result.corpus, out);
    write_atomic(req.out, out.str());

    std::size_t short_notes = 0;
    for (const auto& d : result.dropped) {
      if (d.reason == DroppedNote::Reason::TooShort) {
        ++short_notes;
        m.warnings.push_back("dropped " + d.id + ": fewer than " + std::to_string(options.min_words) + " words");
      } else {
        m.warnings.push_back("dropped " + d.id + ": near duplicate of " + d.kept_id + " (similarity " +
                             json(d.similarity).dump() + ")");
      }
    }
    for (const auto& w : result.warnings) m.warnings.push_back(w);
    m.counts["notes_in"] = corpus.size();
    m.counts["notes_out"] = result.corpus.size();
    m.counts["dropped_short"] = short_notes;
    m.counts["dropped_duplicate"] = result.dropped.size() - short_notes;
  });
}

StageManifest run_identify(const Runtime& rt, const StageRequest& req) {
  return guarded(rt, "identify", req, [&](StageManifest& m) {
    const auto diseases = diseases_for(rt, req);
    const Corpus corpus = read_corpus(req.in);
    json entries = json::array();
    std::size_t total = 0;
    for (const auto& disease : diseases) {
      const DiseaseConcept concept_ = expand_aliases(disease, rt.aliases());
      if (concept_.unknown) m.warnings.push_back("no aliases known for \"" + disease + "\"");
      const auto matches = identify_disease_notes(corpus, concept_, rt.ner(), rt.similarity(),
                                                  rt.config().threshold_notes_identification);
      if (matches.empty()) m.warnings.push_back("no notes found for \"" + disease + "\"");
      json notes = json::array();
      for (const auto& match : matches) {
        json n = {{"id", match.note.id()},
                  {"text", match.note.text()},
                  {"via", match.via == NoteMatch::Via::Alias ? "alias" : "similarity"},
                  {"evidence", match.evidence},
                  {"score", match.score}};
        if (match.note.date()) n["date"] = *match.note.date();
        notes.push_back(std::move(n));
      }
      total += matches.size();
      m.counts["notes:" + concept_.canonical] = matches.size();
      entries.push_back({{"disease", concept_.canonical},
                         {"aliases", concept_.aliases},
                         {"unknown", concept_.unknown},
                         {"notes", notes}});
    }
    write_atomic(req.out, json{{"v", 1}, {"diseases", entries}}.dump(2) + "\n");
    m.counts["diseases"] = diseases.size();
    m.counts["matches"] = total;
  });
}

StageManifest run_extract(const Runtime& rt, const StageRequest& req) {
  return guarded(rt, "extract", req, [&](StageManifest& m) {
    const auto index = read_note_index(req.in);
    auto backend = rt.make_backend(req.backend);
    m.backends.push_back(backend->name());

    RunOptions options;
    options.prompt = rt.prompt_options();
    options.retry = rt.retry_policy();
    options.response = rt.response_options();
    options.templates = &rt.templates();
    options.max_in_flight = static_cast<unsigned>(rt.config().max_in_flight);
    if (req.resume && fs::exists(req.out)) {
      for (auto& r : load_records(req.out)) {
        auto key = record_key(r.backend, r.prompt);
        options.resumed.emplace(std::move(key), std::move(r));
      }
    }

    // checkpoint: append as records arrive, then rewrite in task order
    if (fs::path(req.out).has_parent_path()) fs::create_directories(fs::path(req.out).parent_path());
    std::ofstream checkpoint(req.out, req.resume ? std::ios::app : std::ios::trunc);
    if (!checkpoint) throw Error("cannot write " + req.out);
    options.on_record = [&](const QueryRecord& r) {
      write_record(checkpoint, r);
      checkpoint.flush();
    };
    const QueryRun run = run_queries(index.diseases, index.notes, *backend, options);
    checkpoint.close();

    std::ostringstream out;
    for (const auto& r : run.records) write_record(out, r);
    write_atomic(req.out, out.str());

    const auto expansion = expand_results(run.records, rt.stopwords());
    m.counts["records"] = run.records.size();
    m.counts["resumed"] = run.resumed;
    m.counts["failed"] = run.failures.size();
    m.counts["answers"] = expansion.counters.answers;
    m.counts["dont_know"] = expansion.counters.dont_know;
    m.counts["unstructured"] = expansion.counters.unstructured;
    for (const auto& f : run.failures) {
      m.failures.push_back({{"disease", f.disease},
                            {"note_id", f.note_id},
                            {"category", to_string(f.category)},
                            {"question_id", f.question_id},
                            {"prompt_id", f.prompt_id},
                            {"backend", f.backend},
                            {"error", f.error}});
    }
    if (!run.failures.empty()) m.status = StageManifest::Status::Incomplete;
  });
}

StageManifest run_postprocess(const Runtime& rt, const StageRequest& req) {
  return guarded(rt, "postprocess", req, [&](StageManifest& m) {
    const auto records = load_records(req.in);
    const auto& cfg = rt.config();
    auto expansion = expand_results(records, rt.stopwords());
    const std::size_t raw = expansion.predictions.size();
    CleanupOptions cleanup;
    cleanup.min_score = cfg.postprocess_min_score;
    cleanup.refusals = &rt.refusals();
    const auto cleaned = clean_predictions(std::move(expansion.predictions), cleanup);

    AggregationOptions agg;
    agg.min_count = cfg.relation_occurrence_number;
    agg.min_avg_score = cfg.relation_probability;
    const auto aggregated = aggregate_relations(cleaned, agg);

    FinalizeOptions fin;
    fin.grouping_threshold = cfg.grouping_similarity;
    fin.linkage = cfg.grouping_linkage;
    fin.stopwords = &rt.stopwords();
    const auto relations = finalize_relations(aggregated, rt.similarity(), fin);

    std::set<std::string> diseases;
    std::set<std::string> backends;
    for (const auto& r : records) {
      diseases.insert(r.prompt.disease);
      backends.insert(r.backend);
    }
    json rel = json::array();
    for (const auto& r : relations) rel.push_back(to_json(r));
    json pre = json::array();
    for (const auto& r : aggregated) pre.push_back(to_json(r));
    const json doc = {{"v", 1},
                      {"diseases", diseases},
                      {"relations", rel},
                      {"aggregated", pre},
                      {"counters",
                       {{"records", expansion.counters.records},
                        {"answers", expansion.counters.answers},
                        {"dont_know", expansion.counters.dont_know},
                        {"unstructured", expansion.counters.unstructured},
                        {"raw_predictions", raw},
                        {"kept_predictions", cleaned.size()}}}};
    write_atomic(req.out, doc.dump(2) + "\n");

    m.backends.assign(backends.begin(), backends.end());
    m.counts["records"] = records.size();
    m.counts["raw_predictions"] = raw;
    m.counts["kept_predictions"] = cleaned.size();
    m.counts["aggregated"] = aggregated.size();
    m.counts["relations"] = relations.size();
  });
}

StageManifest run_build_kg(const Runtime& rt, const StageRequest& req) {
  return guarded(rt, "build-kg", req, [&](StageManifest& m) {
    const auto file = read_relations(req.in);
    const KnowledgeGraph kg = build_graph(file.relations, file.diseases);
    const ExportFormat format = req.format.value_or(format_for_extension(req.out));
    write_atomic(req.out, export_graph(kg, format));
    m.counts["nodes"] = kg.nodes().size();
    m.counts["edges"] = kg.edges().size();
  });
}

StageManifest run_eval(const Runtime& rt, const StageRequest& req) {
  return guarded(rt, "eval", req, [&](StageManifest& m) {
    if (req.gold.empty()) throw ValidationError("--gold", "a gold annotation file is required");
    const KnowledgeGraph kg = import_graph_json(text::read_file(req.in));
    const auto gold = load_gold(req.gold);
    m.inputs.push_back(req.gold);
    const auto report = precision_recall(kg, gold, rt.similarity(), rt.config().match_threshold);

    json doc = {{"v", 1}, {"metrics", to_json(report)}, {"safety", nullptr}};
    std::string md = to_markdown(report);
    if (!req.records.empty()) {
      m.inputs.push_back(req.records);
      const auto safety = safety_metrics(load_records(req.records));
      doc["safety"] = to_json(safety);
      md += "\n" + to_markdown(safety);
    }
    write_atomic(req.out, doc.dump(2) + "\n");
    const std::string md_path = replace_extension(req.out, ".md");
    write_atomic(md_path, md);
    m.outputs.push_back(md_path);
    m.counts["rows"] = report.rows.size();
    m.counts["uncovered_diseases"] = report.uncovered_diseases.size();
  });
}

StageManifest run_pipeline(const Runtime& rt, const StageRequest& req) {
  const fs::path dir(req.out);
  fs::create_directories(dir);
  auto at = [&](const char* name) { return (dir / name).string(); };

  StageManifest summary;
  summary.stage = "pipeline";
  summary.inputs.push_back(req.in);
  json stages = json::array();
  auto step = [&](auto fn, StageRequest sub) {
    const StageManifest m = fn(rt, sub);
    stages.push_back({{"stage", m.stage}, {"status", to_string(m.status)}, {"counts", m.counts}, {"output", sub.out}});
    summary.outputs.push_back(sub.out);
    for (const auto& b : m.backends) {
      if (std::find(summary.backends.begin(), summary.backends.end(), b) == summary.backends.end()) {
        summary.backends.push_back(b);
      }
    }
    for (const auto& [k, v] : m.counts) summary.counts[m.stage + "." + k] = v;
    return m;
  };

  StageRequest sub = req;
  auto finish = [&](StageManifest::Status status, const std::string& error) {
    summary.status = status;
    summary.error = error;
    json doc = to_json(summary, rt.config_hash());
    doc["stages"] = stages;
    write_atomic(at("manifest.json"), doc.dump(2) + "\n");
    return summary;
  };

  try {
    sub.in = req.in;
    sub.out = at("notes.jsonl");
    step(run_ingest, sub);
    sub.in = sub.out;
    sub.out = at("preprocessed.jsonl");
    step(run_preprocess, sub);
    sub.in = sub.out;
    sub.out = at("note_index.json");
    step(run_identify, sub);
    sub.in = sub.out;
    sub.out = at("records.jsonl");
    const auto extracted = step(run_extract, sub);
    if (extracted.status != StageManifest::Status::Ok) {
      summary.failures = extracted.failures;
      return finish(extracted.status, "extraction incomplete");
    }
    const std::string records = sub.out;
    sub.in = sub.out;
    sub.out = at("relations.json");
    step(run_postprocess, sub);
    const std::string relations = sub.out;
    for (auto [name, format] : {std::pair{"kg.json", ExportFormat::Json}, std::pair{"kg.dot", ExportFormat::Dot},
                                std::pair{"kg.csv", ExportFormat::Csv}}) {
      sub.in = relations;
      sub.out = at(name);
      sub.format = format;
      step(run_build_kg, sub);
    }
    if (!req.gold.empty()) {
      sub.in = at("kg.json");
      sub.out = at("report.json");
      sub.records = records;
      step(run_eval, sub);
    }
  } catch (const std::exception& e) {
    finish(StageManifest::Status::Failed, e.what());
    throw;
  }
  return finish(StageManifest::Status::Ok, "");
}

}  // namespace clinkg
