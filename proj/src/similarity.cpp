#include "clinkg/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "clinkg/errors.hpp"
#include "clinkg/text.hpp"

namespace clinkg {

EmbeddingVector::EmbeddingVector(std::vector<double> dense) : dimension_(dense.size()) {
  if (dense.empty()) throw std::invalid_argument("embedding must have at least one component");
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (!std::isfinite(dense[i])) throw std::invalid_argument("embedding has a non-finite component");
    if (dense[i] != 0.0) entries_.push_back({static_cast<std::uint32_t>(i), dense[i]});
  }
}

EmbeddingVector::EmbeddingVector(std::size_t dimension, std::vector<Entry> entries)
    : dimension_(dimension) {
  if (dimension == 0) throw std::invalid_argument("embedding must have at least one component");
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.index < b.index; });
  for (const auto& e : entries) {
    if (e.index >= dimension) throw std::invalid_argument("embedding index out of range");
    if (!std::isfinite(e.value)) throw std::invalid_argument("embedding has a non-finite component");
    if (!entries_.empty() && entries_.back().index == e.index) {
      entries_.back().value += e.value;
    } else {
      entries_.push_back(e);
    }
  }
  std::erase_if(entries_, [](const Entry& e) { return e.value == 0.0; });
}

double EmbeddingVector::norm() const {
  double sum = 0.0;
  for (const auto& e : entries_) sum += e.value * e.value;
  return std::sqrt(sum);
}

std::vector<double> EmbeddingVector::to_dense() const {
  std::vector<double> out(dimension_, 0.0);
  for (const auto& e : entries_) out[e.index] = e.value;
  return out;
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.dimension() != v.dimension()) {
    throw std::invalid_argument("cosine: dimension mismatch (" + std::to_string(u.dimension()) +
                                " vs " + std::to_string(v.dimension()) + ")");
  }
  if (u.is_zero() || v.is_zero()) throw std::invalid_argument("cosine: zero vector");
  const auto a = u.entries();
  const auto b = v.entries();
  double dot = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].index < b[j].index) {
      ++i;
    } else if (b[j].index < a[i].index) {
      ++j;
    } else {
      dot += a[i++].value * b[j++].value;
    }
  }
  const double result = dot / (u.norm() * v.norm());
  return std::clamp(result, -1.0, 1.0);
}

double similarity(const SimilarityProvider& provider, std::string_view a, std::string_view b) {
  if (text::trim(a).empty() || text::trim(b).empty()) {
    throw std::invalid_argument("similarity: empty text");
  }
  return cosine(provider.embed(a), provider.embed(b));
}

EmbeddingVector TrigramProvider::embed(std::string_view text) const {
  const std::string clean = text::canonical(text);
  std::vector<EmbeddingVector::Entry> entries;
  std::string padded;
  for (auto token : text::split_whitespace(clean)) {
    padded.assign("#");
    padded.append(token);
    padded.push_back('#');
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
      const auto bucket = text::fnv1a32(std::string_view(padded).substr(i, 3)) % kDimension;
      entries.push_back({static_cast<std::uint32_t>(bucket), 1.0});
    }
  }
  EmbeddingVector counts(kDimension, std::move(entries));
  const double n = counts.norm();
  if (n == 0.0) return counts;
  std::vector<EmbeddingVector::Entry> scaled(counts.entries().begin(), counts.entries().end());
  for (auto& e : scaled) e.value /= n;
  return EmbeddingVector(kDimension, std::move(scaled));
}

ScriptedProvider::ScriptedProvider(std::map<std::string, std::vector<double>> table,
                                   std::string name)
    : name_(std::move(name)) {
  for (auto& [key, dense] : table) table_.emplace(key, EmbeddingVector(std::move(dense)));
}

EmbeddingVector ScriptedProvider::embed(std::string_view text) const {
  const auto it = table_.find(text);
  if (it == table_.end()) throw ProviderError(name_, "no scripted vector for \"" + std::string(text) + "\"");
  return it->second;
}

}  // namespace clinkg

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace clinkg {

std::vector<EmbeddingVector> embed_all(const SimilarityProvider& provider,
                                       std::span<const std::string_view> texts,
                                       unsigned threads) {
  std::vector<EmbeddingVector> out(texts.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, texts.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < texts.size(); ++i) out[i] = provider.embed(texts[i]);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> workers;
  for (unsigned t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < texts.size(); i = next++) {
        try {
          out[i] = provider.embed(texts[i]);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = texts.size();
        }
      }
    });
  }
  workers.clear();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace clinkg
