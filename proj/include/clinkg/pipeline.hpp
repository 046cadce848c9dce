#pragma once

#include <json.hpp>

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "clinkg/config.hpp"
#include "clinkg/extraction.hpp"
#include "clinkg/gateway.hpp"
#include "clinkg/kgraph.hpp"
#include "clinkg/similarity.hpp"
#include "clinkg/terminology.hpp"
#include "clinkg/word_list.hpp"

namespace clinkg {

/// Providers, word lists and templates built once from a validated config.
class Runtime {
 public:
  explicit Runtime(PipelineConfig config);

  const PipelineConfig& config() const noexcept { return config_; }
  const std::string& config_hash() const noexcept { return hash_; }
  const SimilarityProvider& similarity() const noexcept { return *similarity_; }
  const NerProvider& ner() const noexcept { return *ner_; }
  const AliasProvider& aliases() const noexcept { return aliases_; }
  const WordList& stopwords() const noexcept { return stopwords_; }
  const WordList& refusals() const noexcept { return refusals_; }
  const TemplateSet& templates() const noexcept { return templates_; }

  PromptOptions prompt_options() const;
  RetryPolicy retry_policy() const;
  ResponseOptions response_options() const;
  std::unique_ptr<ModelBackend> make_backend(std::string_view name = {}) const;

  /// Replaces the retry sleep, e.g. with a no-op in tests.
  void set_sleep(std::function<void(std::chrono::milliseconds)> sleep) { sleep_ = std::move(sleep); }

 private:
  PipelineConfig config_;
  std::string hash_;
  std::unique_ptr<SimilarityProvider> similarity_;
  std::unique_ptr<NerProvider> ner_;
  AliasTable aliases_;
  WordList stopwords_;
  WordList refusals_;
  TemplateSet templates_;
  std::string guided_template_;
  std::function<void(std::chrono::milliseconds)> sleep_;
};

/// What a stage did; written next to its artifact as <artifact>.manifest.json.
struct StageManifest {
  enum class Status { Ok, Incomplete, Failed };

  std::string stage;
  Status status = Status::Ok;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::vector<std::string> backends;
  std::map<std::string, std::size_t> counts;
  std::vector<std::string> warnings;
  nlohmann::json failures = nlohmann::json::array();
  std::string error;
};

std::string_view to_string(StageManifest::Status status);
nlohmann::json to_json(const StageManifest& manifest, const std::string& config_hash);

struct StageRequest {
  std::string in;
  std::string out;
  /// Overrides the configured disease list when non-empty.
  std::vector<std::string> diseases;
  std::string backend;
  bool resume = false;
  std::optional<ExportFormat> format;
  std::string gold;
  /// Optional query records for safety metrics in eval.
  std::string records;
};

// Every stage writes its artifact plus manifest. On an exception the manifest
// is written with status "failed" and the exception is rethrown. Extraction
// that lost queries to backend failures reports status Incomplete.
StageManifest run_ingest(const Runtime& rt, const StageRequest& req);
StageManifest run_preprocess(const Runtime& rt, const StageRequest& req);
StageManifest run_identify(const Runtime& rt, const StageRequest& req);
StageManifest run_extract(const Runtime& rt, const StageRequest& req);
StageManifest run_postprocess(const Runtime& rt, const StageRequest& req);
StageManifest run_build_kg(const Runtime& rt, const StageRequest& req);
StageManifest run_eval(const Runtime& rt, const StageRequest& req);

/// All stages in order; `req.out` is a directory. Stops after an incomplete
/// extraction. Writes manifest.json summarizing the stages.
StageManifest run_pipeline(const Runtime& rt, const StageRequest& req);

// Artifact readers shared by stages and tests.
Corpus read_corpus(const std::string& path);
struct NoteIndexFile {
  std::vector<std::string> diseases;
  NoteIndex notes;
};
NoteIndexFile read_note_index(const std::string& path);
struct RelationsFile {
  std::vector<std::string> diseases;
  std::vector<Relation> relations;
};
RelationsFile read_relations(const std::string& path);

}  // namespace clinkg
