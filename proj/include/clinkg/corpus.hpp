#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "clinkg/similarity.hpp"

namespace clinkg {

/// One EMR note. The text is kept byte-exact; word_count is the number of
/// whitespace-separated tokens.
class ClinicalNote {
 public:
  ClinicalNote(std::string id, std::string text, std::optional<std::string> date = std::nullopt);

  const std::string& id() const noexcept { return id_; }
  const std::string& text() const noexcept { return text_; }
  const std::optional<std::string>& date() const noexcept { return date_; }
  std::size_t word_count() const noexcept { return word_count_; }

  friend bool operator==(const ClinicalNote&, const ClinicalNote&) = default;

 private:
  std::string id_;
  std::string text_;
  std::optional<std::string> date_;
  std::size_t word_count_;
};

/// Notes in ingestion order with unique ids.
class Corpus {
 public:
  Corpus() = default;

  /// Throws InputError when the id is already present.
  void add(ClinicalNote note);

  const std::vector<ClinicalNote>& notes() const noexcept { return notes_; }
  std::size_t size() const noexcept { return notes_.size(); }
  bool empty() const noexcept { return notes_.empty(); }
  const ClinicalNote* find(std::string_view id) const;

  auto begin() const { return notes_.begin(); }
  auto end() const { return notes_.end(); }

  friend bool operator==(const Corpus& a, const Corpus& b) { return a.notes_ == b.notes_; }

 private:
  std::vector<ClinicalNote> notes_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class CorpusFormat { Jsonl, Csv };

/// Picks the format from the file extension (.csv -> Csv, anything else Jsonl).
CorpusFormat format_for_path(std::string_view path);

Corpus ingest_notes(const std::string& path, CorpusFormat format);
/// `source` only labels error messages.
Corpus parse_jsonl_notes(std::string_view content, const std::string& source = "<memory>");
Corpus parse_csv_notes(std::string_view content, const std::string& source = "<memory>");

/// Writes {"id","text"[,"date"]} per line, the same shape ingest_notes reads.
void write_jsonl(const Corpus& corpus, std::ostream& out);

struct PreprocessOptions {
  double threshold = 0.8;
  std::size_t min_words = 5;
  /// Above this many notes a warning is emitted; the scan stays exact.
  std::size_t warn_above = 10000;
  unsigned threads = 0;
};

struct DroppedNote {
  enum class Reason { TooShort, NearDuplicate };

  std::string id;
  Reason reason;
  /// For NearDuplicate: the note that won the pairwise comparison.
  std::string kept_id;
  double similarity = 0.0;
};

struct PreprocessResult {
  Corpus corpus;
  std::vector<DroppedNote> dropped;
  std::vector<std::string> warnings;
};

/// Removes notes shorter than min_words, then removes near duplicates with a
/// greedy pass in ingestion order: each surviving note is compared with every
/// later surviving note, and when similarity exceeds the threshold the note
/// with fewer words is dropped (equal counts: the larger id is dropped). A
/// note that loses is not compared again.
PreprocessResult preprocess(const Corpus& corpus, const SimilarityProvider& sim,
                            const PreprocessOptions& options = {});

}  // namespace clinkg
