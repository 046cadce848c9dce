#pragma once

#include <json.hpp>

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "clinkg/postprocess.hpp"
#include "clinkg/prompting.hpp"

namespace clinkg {

struct ProviderConfig {
  /// similarity: "trigram" | "remote"; ner: "none" | "lexicon" | "remote".
  std::string provider;
  std::string url;
  /// Environment variable holding the bearer token, if any.
  std::string token_env;
  int timeout_ms = 30000;
  /// Lexicon NER terms.
  std::vector<std::string> terms;

  static ProviderConfig named(std::string provider) {
    ProviderConfig c;
    c.provider = std::move(provider);
    return c;
  }
};

struct BackendConfig {
  std::string name;
  /// "fixture" | "http_generative" | "http_qa"
  std::string type;
  /// Fixture script path.
  std::string script;
  std::string url;
  std::string token_env;
  int timeout_ms = 30000;
  int max_tokens = 256;
  double temperature = 0.0;
};

/// Every tunable of the pipeline. Relative paths are resolved against the
/// directory of the config file.
struct PipelineConfig {
  double threshold_preprocessing = 0.8;
  double threshold_notes_identification = 0.8;
  std::size_t relation_occurrence_number = 10;
  double relation_probability = 0.1;
  double postprocess_min_score = 0.08;
  double grouping_similarity = 0.8;
  Linkage grouping_linkage = Linkage::Single;
  double match_threshold = 0.8;
  std::size_t min_words = 5;
  std::size_t top_k = 5;
  /// Total attempts per query.
  std::size_t retry_budget = 3;
  std::size_t retry_base_delay_ms = 200;
  std::size_t max_in_flight = 4;
  double default_answer_score = 0.5;
  std::size_t max_free_text_words = 32;

  PromptStyle prompt_style = PromptStyle::Guided;
  std::vector<Exemplar> exemplars;
  std::string guided_template;  // path, empty = built-in
  std::string templates;        // path, empty = built-in
  std::string stopwords;        // path, empty = built-in
  std::string refusals;         // path, empty = built-in

  std::vector<std::string> diseases;
  std::string alias_table;  // path, empty = no aliases beyond the name itself
  ProviderConfig similarity = ProviderConfig::named("trigram");
  ProviderConfig ner = ProviderConfig::named("none");
  std::vector<BackendConfig> backends;
  /// Backend used when none is named on the command line; empty = the first.
  std::string backend;
};

/// Throws ValidationError naming the offending field: unknown keys, wrong
/// types, scores outside [0, 1], negative integers, bad enum values.
PipelineConfig parse_config(std::string_view content, const std::string& base_dir = ".");
PipelineConfig load_config(const std::string& path);
/// Range and consistency checks; parse_config already calls it.
void validate(const PipelineConfig& config);

nlohmann::json to_json(const PipelineConfig& config);
/// 16 hex digits over the canonical JSON form.
std::string config_hash(const PipelineConfig& config);

/// Looks up a backend by name (empty = config.backend, then the first).
/// Throws ValidationError when absent.
const BackendConfig& select_backend(const PipelineConfig& config, std::string_view name = {});

}  // namespace clinkg
