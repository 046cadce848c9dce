#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "clinkg/corpus.hpp"
#include "clinkg/similarity.hpp"

namespace clinkg {

/// A disease and the surface forms it may appear under in notes.
struct DiseaseConcept {
  std::string canonical;
  /// Unique case-insensitively; always contains `canonical`.
  std::vector<std::string> aliases;
  /// Set when the alias provider did not know the disease.
  bool unknown = false;
};

class AliasProvider {
 public:
  virtual ~AliasProvider() = default;
  virtual std::string name() const = 0;
  /// Aliases for `disease`, or nullopt when the provider has no entry.
  virtual std::optional<std::vector<std::string>> expand(std::string_view disease) const = 0;
};

/// JSON object mapping a canonical disease name to a list of aliases. Keys
/// are matched case-insensitively.
class AliasTable final : public AliasProvider {
 public:
  AliasTable() = default;
  explicit AliasTable(std::map<std::string, std::vector<std::string>> entries);
  static AliasTable from_file(const std::string& path);
  static AliasTable from_json_text(std::string_view content, const std::string& source = "<memory>");

  std::string name() const override { return "alias-table"; }
  std::optional<std::vector<std::string>> expand(std::string_view disease) const override;

 private:
  std::map<std::string, std::vector<std::string>> entries_;  // key lowercased
};

DiseaseConcept expand_aliases(std::string_view disease, const AliasProvider& provider);

/// A mention found by NER: note bytes [start, end) equal `text`.
struct NerSpan {
  std::string text;
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const NerSpan&, const NerSpan&) = default;
};

class NerProvider {
 public:
  virtual ~NerProvider() = default;
  virtual std::string name() const = 0;
  virtual std::vector<NerSpan> extract(std::string_view text) const = 0;
};

class NullNerProvider final : public NerProvider {
 public:
  std::string name() const override { return "none"; }
  std::vector<NerSpan> extract(std::string_view) const override { return {}; }
};

/// Reports every token-bounded, case-insensitive occurrence of a fixed list of
/// terms. Useful as a deterministic stand-in for a trained NER model.
class LexiconNerProvider final : public NerProvider {
 public:
  explicit LexiconNerProvider(std::vector<std::string> terms);

  std::string name() const override { return "lexicon"; }
  std::vector<NerSpan> extract(std::string_view text) const override;

 private:
  std::vector<std::string> terms_;
};

/// Throws ProviderError(provider) unless every span lies inside `text` and
/// matches the bytes it covers.
void validate_spans(std::string_view text, const std::vector<NerSpan>& spans,
                    const std::string& provider);

struct NoteMatch {
  enum class Via { Alias, Similarity };

  ClinicalNote note;
  Via via;
  /// The alias or NER mention that triggered the match.
  std::string evidence;
  /// Similarity of the mention to the canonical name (1.0 for alias hits).
  double score = 1.0;
};

/// A note is kept when one of the concept's aliases occurs in it on token
/// boundaries, or, failing that, when an NER mention has similarity to the
/// canonical name strictly above `threshold`. Output keeps corpus order.
std::vector<NoteMatch> identify_disease_notes(const Corpus& corpus, const DiseaseConcept& concept_,
                                              const NerProvider& ner, const SimilarityProvider& sim,
                                              double threshold = 0.8);

}  // namespace clinkg
