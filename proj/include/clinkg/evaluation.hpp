#pragma once

#include <json.hpp>

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "clinkg/gateway.hpp"
#include "clinkg/kgraph.hpp"
#include "clinkg/similarity.hpp"

namespace clinkg {

/// Expected entity values for one (disease, category).
struct GoldAnnotation {
  std::string disease;
  EntityCategory category = EntityCategory::Treatment;
  std::vector<std::string> values;
};

/// JSON list of {"disease", "category", "values": [...]}; values must be
/// non-empty. Throws InputError.
std::vector<GoldAnnotation> parse_gold_json(std::string_view content, const std::string& source = "<memory>");
std::vector<GoldAnnotation> load_gold(const std::string& path);

/// One-to-one matching of normalized strings: equal strings pair first, then
/// the remaining pairs with similarity strictly above `threshold`, best first
/// (ties: lexicographic). Returns (predicted, gold) pairs.
std::vector<std::pair<std::string, std::string>> match_entities(const std::vector<std::string>& predicted,
                                                                const std::vector<std::string>& gold,
                                                                const SimilarityProvider& sim, double threshold = 0.8);

struct CategoryMetrics {
  std::string disease;
  EntityCategory category = EntityCategory::Treatment;
  std::size_t predicted = 0;
  std::size_t gold = 0;
  std::size_t matched = 0;
  /// matched / predicted; 1 when both sets are empty, 0 when only the
  /// prediction set is empty (then `empty_prediction` is set).
  double precision = 0.0;
  /// matched / gold; 1 when gold is empty.
  double recall = 0.0;
  bool empty_prediction = false;
  std::vector<std::pair<std::string, std::string>> matches;
};

struct MetricsReport {
  /// Sorted by (disease, category).
  std::vector<CategoryMetrics> rows;
  /// Pooled over all diseases, one per category.
  std::vector<CategoryMetrics> overall;
  /// Diseases in the graph that the gold file does not cover.
  std::vector<std::string> uncovered_diseases;
};

MetricsReport precision_recall(const KnowledgeGraph& kg, const std::vector<GoldAnnotation>& gold,
                               const SimilarityProvider& sim, double match_threshold = 0.8);

struct BackendSafety {
  std::string backend;
  std::size_t total_queries = 0;
  std::size_t answers = 0;
  std::size_t dont_know = 0;
  std::size_t unstructured = 0;
  double unstructured_rate = 0.0;
  double dontknow_rate = 0.0;
  /// Up to kMaxExamples raw responses per failure class.
  std::vector<std::string> unstructured_examples;
  std::vector<std::string> dont_know_examples;
};

struct SafetyReport {
  static constexpr std::size_t kMaxExamples = 10;
  /// Sorted by backend name.
  std::vector<BackendSafety> backends;
};

/// Throws std::invalid_argument on an empty record list.
SafetyReport safety_metrics(const std::vector<QueryRecord>& records);

nlohmann::json to_json(const MetricsReport& report);
nlohmann::json to_json(const SafetyReport& report);
/// Table with one row per (disease, category) plus pooled rows.
std::string to_markdown(const MetricsReport& report);
std::string to_markdown(const SafetyReport& report);

}  // namespace clinkg
