#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "clinkg/similarity.hpp"
#include "clinkg/word_list.hpp"

namespace clinkg {

/// A predicted entity string with the model's score for it.
struct ScoredText {
  std::string text;
  double score = 0.0;

  friend bool operator==(const ScoredText&, const ScoredText&) = default;
};

/// Keeps predictions with score >= min_score.
std::vector<ScoredText> filter_low_score(std::vector<ScoredText> preds, double min_score);

/// Lowercase, strip punctuation and stop words, collapse whitespace. Returns
/// nullopt when nothing is left.
std::optional<std::string> normalize(std::string_view text,
                                     const WordList& stopwords = WordList::builtin_stopwords());

/// Removes predictions that are variations of "I do not know".
std::vector<ScoredText> drop_refusals(std::vector<ScoredText> preds,
                                      const WordList& refusals = WordList::builtin_refusals());

enum class Linkage { Single, Complete };

struct PredictionGroup {
  /// Sorted by score (descending), then text.
  std::vector<ScoredText> members;
  /// Positions of the members in the input list, same order as `members`.
  std::vector<std::size_t> indices;
  ScoredText representative;
  std::size_t representative_index = 0;
};

/// Clusters predictions whose normalized texts have similarity strictly above
/// `threshold`. Single linkage merges connected components; Complete linkage
/// adds a prediction to the first group it is similar to in full. The
/// representative is the highest-scoring member (ties: longer text, then
/// lexicographically smaller). Groups come out ordered by representative.
/// Throws std::invalid_argument if a text normalizes to nothing.
std::vector<PredictionGroup> group_similar(const std::vector<ScoredText>& preds, const SimilarityProvider& sim,
                                           double threshold, Linkage linkage = Linkage::Single,
                                           const WordList& stopwords = WordList::builtin_stopwords());

/// Splits a representative into its listed values on commas and the
/// standalone word "and". Each value keeps the representative's score.
std::vector<ScoredText> split_spans(const ScoredText& representative);

struct PostprocessOptions {
  double min_score = 0.08;
  double grouping_threshold = 0.8;
  Linkage linkage = Linkage::Single;
  const WordList* stopwords = nullptr;  // null = built-in
  const WordList* refusals = nullptr;   // null = built-in
};

/// The whole chain for one entity list: filter, drop refusals, drop texts
/// that normalize to nothing, group, then split each representative.
std::vector<ScoredText> postprocess_predictions(std::vector<ScoredText> raw, const SimilarityProvider& sim,
                                                const PostprocessOptions& options = {});

}  // namespace clinkg
