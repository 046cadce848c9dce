#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace clinkg {

/// Fixed-dimension real vector stored sparsely (dense vectors simply list
/// every index). Entries are sorted by index, finite and non-zero.
class EmbeddingVector {
 public:
  struct Entry {
    std::uint32_t index;
    double value;
  };

  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> dense);
  /// Duplicate indices are summed.
  EmbeddingVector(std::size_t dimension, std::vector<Entry> entries);

  std::size_t dimension() const noexcept { return dimension_; }
  std::span<const Entry> entries() const noexcept { return entries_; }
  bool is_zero() const noexcept { return entries_.empty(); }
  double norm() const;
  std::vector<double> to_dense() const;

 private:
  std::size_t dimension_ = 0;
  std::vector<Entry> entries_;
};

/// dot(u, v) / (|u| |v|). Throws std::invalid_argument on a dimension
/// mismatch or when either vector is all-zero.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

/// Text -> vector contract behind every similarity threshold in the pipeline.
/// Implementations must be safe for concurrent calls to embed().
class SimilarityProvider {
 public:
  virtual ~SimilarityProvider() = default;
  virtual std::string name() const = 0;
  virtual EmbeddingVector embed(std::string_view text) const = 0;
};

/// cosine(embed(a), embed(b)); throws std::invalid_argument for blank text.
double similarity(const SimilarityProvider& provider, std::string_view a, std::string_view b);

/// Default provider: L2-normalised term frequencies of padded character
/// trigrams ("#tok#") over the canonical form of the text, hashed with
/// FNV-1a into 2^20 buckets. Word order does not matter.
class TrigramProvider final : public SimilarityProvider {
 public:
  static constexpr std::size_t kDimension = std::size_t{1} << 20;

  std::string name() const override { return "trigram"; }
  EmbeddingVector embed(std::string_view text) const override;
};

/// Lookup-table provider for tests and hand-built fixtures. Unknown text is a
/// ProviderError.
class ScriptedProvider final : public SimilarityProvider {
 public:
  explicit ScriptedProvider(std::map<std::string, std::vector<double>> table,
                            std::string name = "scripted");

  std::string name() const override { return name_; }
  EmbeddingVector embed(std::string_view text) const override;

 private:
  std::map<std::string, EmbeddingVector, std::less<>> table_;
  std::string name_;
};

}  // namespace clinkg

namespace clinkg {

/// Embed many texts, spreading the calls over `threads` workers (0 = hardware
/// concurrency). Output order matches input order.
std::vector<EmbeddingVector> embed_all(const SimilarityProvider& provider,
                                       std::span<const std::string_view> texts,
                                       unsigned threads = 0);

}  // namespace clinkg
