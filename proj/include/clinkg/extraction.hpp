#pragma once

#include <json.hpp>

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "clinkg/corpus.hpp"
#include "clinkg/gateway.hpp"
#include "clinkg/postprocess.hpp"
#include "clinkg/prompting.hpp"

namespace clinkg {

/// Notes relevant to each disease, keyed by the disease's canonical name.
using NoteIndex = std::map<std::string, std::vector<ClinicalNote>>;

struct RunOptions {
  PromptOptions prompt;
  RetryPolicy retry;
  ResponseOptions response;
  const TemplateSet* templates = nullptr;  // null = built-in
  /// Queries issued concurrently.
  unsigned max_in_flight = 4;
  /// Records from an earlier run, by record_key(). Matching queries are not
  /// re-issued and the old record takes their place in the output.
  std::map<std::string, QueryRecord> resumed;
  /// Called once per finished record, serialized, in completion order.
  std::function<void(const QueryRecord&)> on_record;
};

struct QueryFailure {
  std::string disease;
  std::string note_id;
  EntityCategory category = EntityCategory::Treatment;
  std::string question_id;
  std::string prompt_id;
  std::string backend;
  std::string error;
};

struct QueryRun {
  /// In task order: disease, category, question, note. Includes resumed ones.
  std::vector<QueryRecord> records;
  std::vector<QueryFailure> failures;
  std::size_t resumed = 0;
};

/// Identifies a query across runs for resuming.
std::string record_key(const std::string& backend, const Prompt& prompt);

/// Queries `backend` once per (disease, category, question, note). A query
/// that exhausts its retries is reported in `failures`; the rest still run.
QueryRun run_queries(const std::vector<std::string>& diseases, const NoteIndex& notes, ModelBackend& backend,
                     const RunOptions& options = {});

/// One entity mentioned by one answer.
struct RawPrediction {
  /// As the model wrote it.
  std::string surface;
  /// normalize(surface); empty when nothing is left after normalization.
  std::string entity;
  double score = 0.0;
  std::string disease;
  EntityCategory category = EntityCategory::Treatment;
  std::string note_id;
  std::string question_id;
};

struct SafetyCounters {
  std::size_t records = 0;
  std::size_t answers = 0;
  std::size_t dont_know = 0;
  std::size_t unstructured = 0;
};

struct Expansion {
  std::vector<RawPrediction> predictions;
  SafetyCounters counters;
};

/// One prediction per answer of every Answers record; DontKnow and
/// Unstructured records yield none and are only counted.
Expansion expand_results(const std::vector<QueryRecord>& records,
                         const WordList& stopwords = WordList::builtin_stopwords());

struct CleanupOptions {
  double min_score = 0.08;
  const WordList* refusals = nullptr;  // null = built-in
};

/// Drops predictions scored below min_score, refusals, and those with an
/// empty normalized form.
std::vector<RawPrediction> clean_predictions(std::vector<RawPrediction> preds, const CleanupOptions& options = {});

/// An (entity, disease, category) triple with statistics over its predictions.
struct Relation {
  std::string disease;
  EntityCategory category = EntityCategory::Treatment;
  /// Normalized entity.
  std::string entity;
  /// Display form: the highest-scoring surface (ties: lexicographically smaller).
  std::string surface;
  double avg_score = 0.0;
  std::size_t count = 0;

  friend bool operator==(const Relation&, const Relation&) = default;
};

/// Mean of `scores`, independent of their order.
double mean_score(std::vector<double> scores);

/// Every (entity, disease, category) group, unfiltered, sorted by
/// (disease, category, entity).
std::vector<Relation> build_candidates(const std::vector<RawPrediction>& preds);

/// True when `a` wins over `b` for the same (disease, entity): higher average,
/// then higher count, then category order Treatment, Factor, CoexistsWith.
bool wins_argmax(const Relation& a, const Relation& b);

struct AggregationOptions {
  std::size_t min_count = 10;
  double min_avg_score = 0.1;
};

/// Keeps groups with count >= min_count and average >= min_avg_score, then
/// the winning category per (disease, entity). Sorted by (disease, category,
/// entity). Throws std::invalid_argument on out-of-range options.
std::vector<Relation> aggregate_relations(const std::vector<RawPrediction>& preds,
                                          const AggregationOptions& options = {});

struct FinalizeOptions {
  double grouping_threshold = 0.8;
  Linkage linkage = Linkage::Single;
  const WordList* stopwords = nullptr;  // null = built-in
};

/// Per (disease, category): group similar relations, keep each group's
/// representative, split it into its listed values and merge values with the
/// same normalized form. Finally re-applies the category argmax.
std::vector<Relation> finalize_relations(const std::vector<Relation>& relations, const SimilarityProvider& sim,
                                         const FinalizeOptions& options = {});

// Versioned JSON forms, one object per JSONL line.
nlohmann::json to_json(const QueryRecord& record);
QueryRecord query_record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RawPrediction& pred);
RawPrediction raw_prediction_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Relation& relation);
Relation relation_from_json(const nlohmann::json& j);

/// Reads a JSONL file of records. A truncated last line (interrupted write)
/// is ignored; any other malformed line throws InputError.
std::vector<QueryRecord> load_records(const std::string& path);
void write_record(std::ostream& out, const QueryRecord& record);

}  // namespace clinkg
