#include "clinkg/extraction.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "clinkg/errors.hpp"
#include "clinkg/text.hpp"

namespace clinkg {

using nlohmann::json;

std::string record_key(const std::string& backend, const Prompt& prompt) {
  return backend + "/" + prompt.id() + "/" + prompt.question_id + "/" + prompt.note_id;
}

QueryRun run_queries(const std::vector<std::string>& diseases, const NoteIndex& notes, ModelBackend& backend,
                     const RunOptions& options) {
  const TemplateSet& templates = options.templates ? *options.templates : TemplateSet::builtin();

  std::vector<Prompt> prompts;
  for (const auto& disease : diseases) {
    const auto found = notes.find(disease);
    if (found == notes.end()) continue;
    for (auto category : kCategories) {
      for (const auto& q : instantiate_questions(disease, category, templates)) {
        for (const auto& note : found->second) {
          Prompt p = build_prompt(options.prompt, q.text, note.text(), category);
          p.question_id = q.template_id;
          p.note_id = note.id();
          p.disease = disease;
          prompts.push_back(std::move(p));
        }
      }
    }
  }

  QueryRun run;
  std::vector<std::size_t> pending;
  std::vector<std::optional<QueryRecord>> records(prompts.size());
  const std::string backend_name = backend.name();
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    const auto old = options.resumed.find(record_key(backend_name, prompts[i]));
    if (old != options.resumed.end()) {
      records[i] = old->second;
      ++run.resumed;
    } else {
      pending.push_back(i);
    }
  }

  std::vector<std::optional<QueryFailure>> failures(prompts.size());
  std::atomic<std::size_t> next{0};
  std::mutex callback_mutex;
  std::exception_ptr first_error;

  auto worker = [&] {
    for (std::size_t k = next++; k < pending.size(); k = next++) {
      const Prompt& prompt = prompts[pending[k]];
      try {
        auto record = query(backend, prompt, options.retry, options.response);
        if (options.on_record) {
          std::lock_guard lock(callback_mutex);
          options.on_record(record);
        }
        records[pending[k]] = std::move(record);
      } catch (const BackendError& e) {
        failures[pending[k]] = QueryFailure{prompt.disease,     prompt.note_id, prompt.category, prompt.question_id,
                                            prompt.id(),        backend_name,   e.what()};
      } catch (...) {
        std::lock_guard lock(callback_mutex);
        if (!first_error) first_error = std::current_exception();
        next = pending.size();
      }
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(options.max_in_flight, 1, std::max<std::size_t>(1, pending.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);

  for (std::size_t i = 0; i < prompts.size(); ++i) {
    if (records[i]) run.records.push_back(std::move(*records[i]));
    if (failures[i]) run.failures.push_back(std::move(*failures[i]));
  }
  return run;
}

Expansion expand_results(const std::vector<QueryRecord>& records, const WordList& stopwords) {
  Expansion out;
  for (const auto& r : records) {
    ++out.counters.records;
    switch (r.parsed.outcome) {
      case ParseOutcome::DontKnow: ++out.counters.dont_know; continue;
      case ParseOutcome::Unstructured: ++out.counters.unstructured; continue;
      case ParseOutcome::Answers: ++out.counters.answers; break;
    }
    for (const auto& a : r.parsed.answers) {
      RawPrediction p;
      p.surface = a.text;
      p.entity = normalize(a.text, stopwords).value_or("");
      p.score = a.score;
      p.disease = r.prompt.disease;
      p.category = r.prompt.category;
      p.note_id = r.prompt.note_id;
      p.question_id = r.prompt.question_id;
      out.predictions.push_back(std::move(p));
    }
  }
  return out;
}

std::vector<RawPrediction> clean_predictions(std::vector<RawPrediction> preds, const CleanupOptions& options) {
  const WordList& refusals = options.refusals ? *options.refusals : WordList::builtin_refusals();
  std::erase_if(preds, [&](const RawPrediction& p) {
    return p.score < options.min_score || p.entity.empty() || refusals.contains(p.surface);
  });
  return preds;
}

double mean_score(std::vector<double> scores) {
  if (scores.empty()) throw std::invalid_argument("mean_score: no scores");
  std::sort(scores.begin(), scores.end());
  // Neumaier summation: ten copies of 0.1 average to exactly 0.1
  double sum = 0.0;
  double carry = 0.0;
  for (double s : scores) {
    const double t = sum + s;
    if (std::abs(sum) >= std::abs(s)) carry += (sum - t) + s;
    else carry += (s - t) + sum;
    sum = t;
  }
  return (sum + carry) / static_cast<double>(scores.size());
}

namespace {

using GroupKey = std::tuple<std::string, EntityCategory, std::string>;

struct Accumulator {
  std::vector<double> scores;
  std::string surface;
  double best = -1.0;
};

bool category_before(EntityCategory a, EntityCategory b) {
  return static_cast<int>(a) < static_cast<int>(b);
}

void sort_relations(std::vector<Relation>& rels) {
  std::sort(rels.begin(), rels.end(), [](const Relation& a, const Relation& b) {
    return std::tie(a.disease, a.category, a.entity) < std::tie(b.disease, b.category, b.entity);
  });
}

std::vector<Relation> apply_argmax(const std::vector<Relation>& rels) {
  std::map<std::pair<std::string, std::string>, const Relation*> best;
  for (const auto& r : rels) {
    auto& slot = best[{r.disease, r.entity}];
    if (!slot || wins_argmax(r, *slot)) slot = &r;
  }
  std::vector<Relation> out;
  out.reserve(best.size());
  for (const auto& [key, r] : best) out.push_back(*r);
  sort_relations(out);
  return out;
}

}  // namespace

std::vector<Relation> build_candidates(const std::vector<RawPrediction>& preds) {
  std::map<GroupKey, Accumulator> groups;
  for (const auto& p : preds) {
    if (p.entity.empty()) continue;
    auto& acc = groups[{p.disease, p.category, p.entity}];
    acc.scores.push_back(p.score);
    if (p.score > acc.best || (p.score == acc.best && p.surface < acc.surface)) {
      acc.best = p.score;
      acc.surface = p.surface;
    }
  }
  std::vector<Relation> out;
  out.reserve(groups.size());
  for (auto& [key, acc] : groups) {
    Relation r;
    r.disease = std::get<0>(key);
    r.category = std::get<1>(key);
    r.entity = std::get<2>(key);
    r.surface = acc.surface;
    r.count = acc.scores.size();
    r.avg_score = mean_score(std::move(acc.scores));
    out.push_back(std::move(r));
  }
  sort_relations(out);
  return out;
}

bool wins_argmax(const Relation& a, const Relation& b) {
  if (a.avg_score != b.avg_score) return a.avg_score > b.avg_score;
  if (a.count != b.count) return a.count > b.count;
  return category_before(a.category, b.category);
}

std::vector<Relation> aggregate_relations(const std::vector<RawPrediction>& preds, const AggregationOptions& options) {
  if (!(options.min_avg_score >= 0.0 && options.min_avg_score <= 1.0)) {
    throw std::invalid_argument("aggregate_relations: min_avg_score must be in [0, 1]");
  }
  auto candidates = build_candidates(preds);
  std::erase_if(candidates, [&](const Relation& r) {
    return r.count < options.min_count || r.avg_score < options.min_avg_score;
  });
  return apply_argmax(candidates);
}

std::vector<Relation> finalize_relations(const std::vector<Relation>& relations, const SimilarityProvider& sim,
                                         const FinalizeOptions& options) {
  const WordList& stopwords = options.stopwords ? *options.stopwords : WordList::builtin_stopwords();

  std::map<std::pair<std::string, EntityCategory>, std::vector<const Relation*>> partitions;
  for (const auto& r : relations) partitions[{r.disease, r.category}].push_back(&r);

  std::vector<Relation> merged;
  for (const auto& [key, members] : partitions) {
    std::vector<ScoredText> items;
    items.reserve(members.size());
    for (const auto* r : members) items.push_back({r->surface, r->avg_score});

    std::map<std::string, Relation> by_entity;
    for (const auto& group : group_similar(items, sim, options.grouping_threshold, options.linkage, stopwords)) {
      const Relation& rep = *members[group.representative_index];
      for (const auto& piece : split_spans(group.representative)) {
        auto entity = normalize(piece.text, stopwords);
        if (!entity) continue;
        Relation value = rep;
        value.entity = *entity;
        value.surface = piece.text;
        auto [it, inserted] = by_entity.try_emplace(*entity, value);
        if (inserted) continue;
        Relation& cur = it->second;
        const bool better = value.avg_score > cur.avg_score ||
                            (value.avg_score == cur.avg_score &&
                             (value.count > cur.count || (value.count == cur.count && value.surface < cur.surface)));
        if (better) cur = value;
      }
    }
    for (auto& [entity, r] : by_entity) merged.push_back(std::move(r));
  }
  return apply_argmax(merged);
}

namespace {

EntityCategory category_field(const json& j, const char* field) {
  const auto c = parse_category(j.at(field).get<std::string>());
  if (!c) throw std::invalid_argument(std::string("unknown category in \"") + field + "\"");
  return *c;
}

void check_version(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("expected a JSON object");
  const int v = j.value("v", 0);
  if (v != 1) throw std::invalid_argument("unsupported record version " + std::to_string(v));
}

}  // namespace

json to_json(const QueryRecord& r) {
  json answers = json::array();
  for (const auto& a : r.parsed.answers) answers.push_back({{"text", a.text}, {"score", a.score}});
  return {{"v", 1},
          {"backend", r.backend},
          {"prompt_id", r.prompt.id()},
          {"disease", r.prompt.disease},
          {"note_id", r.prompt.note_id},
          {"category", to_string(r.prompt.category)},
          {"question_id", r.prompt.question_id},
          {"question", r.prompt.question},
          {"style", to_string(r.prompt.style)},
          {"context", r.prompt.context},
          {"prompt", r.prompt.text},
          {"raw_response", r.raw_response},
          {"token_logprobs", r.token_logprobs ? json(*r.token_logprobs) : json(nullptr)},
          {"outcome", to_string(r.parsed.outcome)},
          {"answers", answers},
          {"latency_ms", r.latency_ms},
          {"attempts", r.attempts}};
}

QueryRecord query_record_from_json(const json& j) {
  check_version(j);
  QueryRecord r;
  r.backend = j.at("backend").get<std::string>();
  r.prompt.disease = j.at("disease").get<std::string>();
  r.prompt.note_id = j.at("note_id").get<std::string>();
  r.prompt.category = category_field(j, "category");
  r.prompt.question_id = j.at("question_id").get<std::string>();
  r.prompt.question = j.at("question").get<std::string>();
  const auto style = parse_prompt_style(j.at("style").get<std::string>());
  if (!style) throw std::invalid_argument("unknown prompt style");
  r.prompt.style = *style;
  r.prompt.context = j.at("context").get<std::string>();
  r.prompt.text = j.at("prompt").get<std::string>();
  r.raw_response = j.at("raw_response").get<std::string>();
  if (j.contains("token_logprobs") && !j["token_logprobs"].is_null()) {
    r.token_logprobs = j["token_logprobs"].get<std::vector<double>>();
  }
  const auto outcome = parse_outcome(j.at("outcome").get<std::string>());
  if (!outcome) throw std::invalid_argument("unknown outcome");
  r.parsed.outcome = *outcome;
  for (const auto& a : j.at("answers")) r.parsed.answers.push_back({a.at("text").get<std::string>(), a.at("score").get<double>()});
  if ((r.parsed.outcome == ParseOutcome::Answers) == r.parsed.answers.empty()) {
    throw std::invalid_argument("answers do not match outcome");
  }
  r.latency_ms = j.value("latency_ms", 0.0);
  r.attempts = j.value("attempts", 1);
  return r;
}

json to_json(const RawPrediction& p) {
  return {{"v", 1},           {"surface", p.surface},   {"entity", p.entity},
          {"score", p.score}, {"disease", p.disease},   {"category", to_string(p.category)},
          {"note_id", p.note_id}, {"question_id", p.question_id}};
}

RawPrediction raw_prediction_from_json(const json& j) {
  check_version(j);
  RawPrediction p;
  p.surface = j.at("surface").get<std::string>();
  p.entity = j.at("entity").get<std::string>();
  p.score = j.at("score").get<double>();
  p.disease = j.at("disease").get<std::string>();
  p.category = category_field(j, "category");
  p.note_id = j.value("note_id", "");
  p.question_id = j.value("question_id", "");
  return p;
}

json to_json(const Relation& r) {
  return {{"disease", r.disease},     {"category", to_string(r.category)}, {"entity", r.entity},
          {"surface", r.surface},     {"avg_score", r.avg_score},          {"count", r.count}};
}

Relation relation_from_json(const json& j) {
  Relation r;
  r.disease = j.at("disease").get<std::string>();
  r.category = category_field(j, "category");
  r.entity = j.at("entity").get<std::string>();
  r.surface = j.value("surface", r.entity);
  r.avg_score = j.at("avg_score").get<double>();
  r.count = j.at("count").get<std::size_t>();
  return r;
}

std::vector<QueryRecord> load_records(const std::string& path) {
  const std::string content = text::read_file(path);
  std::vector<QueryRecord> out;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    const bool terminated = end != std::string::npos;
    if (!terminated) end = content.size();
    ++line_no;
    const auto line = text::trim(std::string_view(content).substr(start, end - start));
    start = end + 1;
    if (line.empty()) continue;
    try {
      out.push_back(query_record_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      if (!terminated) break;  // interrupted write
      throw InputError(path, line_no, e.what());
    }
  }
  return out;
}

void write_record(std::ostream& out, const QueryRecord& record) {
  out << to_json(record).dump() << '\n';
}

}  // namespace clinkg
