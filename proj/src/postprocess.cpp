#include "clinkg/postprocess.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "clinkg/text.hpp"

namespace clinkg {

std::vector<ScoredText> filter_low_score(std::vector<ScoredText> preds, double min_score) {
  if (!(min_score >= 0.0 && min_score <= 1.0)) throw std::invalid_argument("filter_low_score: min_score must be in [0, 1]");
  std::erase_if(preds, [&](const ScoredText& p) { return p.score < min_score; });
  return preds;
}

std::optional<std::string> normalize(std::string_view input, const WordList& stopwords) {
  const std::string clean = text::canonical(input);
  std::string out;
  for (auto token : text::split_whitespace(clean)) {
    if (stopwords.contains(token)) continue;
    if (!out.empty()) out.push_back(' ');
    out.append(token);
  }
  if (out.empty()) return std::nullopt;
  return out;
}

std::vector<ScoredText> drop_refusals(std::vector<ScoredText> preds, const WordList& refusals) {
  std::erase_if(preds, [&](const ScoredText& p) { return refusals.contains(p.text); });
  return preds;
}

namespace {

// Strict weak order: better representative first.
bool ranks_before(const ScoredText& a, const ScoredText& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.text.size() != b.text.size()) return a.text.size() > b.text.size();
  return a.text < b.text;
}

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

std::vector<PredictionGroup> group_similar(const std::vector<ScoredText>& preds, const SimilarityProvider& sim,
                                           double threshold, Linkage linkage, const WordList& stopwords) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw std::invalid_argument("group_similar: threshold must be in [0, 1]");
  const std::size_t n = preds.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (ranks_before(preds[a], preds[b])) return true;
    if (ranks_before(preds[b], preds[a])) return false;
    return a < b;
  });

  std::vector<EmbeddingVector> vectors;
  vectors.reserve(n);
  for (const auto& p : preds) {
    const auto norm = normalize(p.text, stopwords);
    if (!norm) throw std::invalid_argument("group_similar: \"" + p.text + "\" normalizes to nothing");
    vectors.push_back(sim.embed(*norm));
  }
  auto similar = [&](std::size_t a, std::size_t b) {
    if (vectors[a].is_zero() || vectors[b].is_zero()) return false;
    return cosine(vectors[a], vectors[b]) > threshold;
  };

  std::vector<std::vector<std::size_t>> clusters;
  if (linkage == Linkage::Single) {
    DisjointSets sets(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (similar(i, j)) sets.unite(i, j);
      }
    }
    std::vector<std::size_t> slot(n, n);
    for (std::size_t idx : order) {
      const std::size_t root = sets.find(idx);
      if (slot[root] == n) {
        slot[root] = clusters.size();
        clusters.emplace_back();
      }
      clusters[slot[root]].push_back(idx);
    }
  } else {
    for (std::size_t idx : order) {
      auto fits = [&](const std::vector<std::size_t>& c) {
        return std::all_of(c.begin(), c.end(), [&](std::size_t m) { return similar(idx, m); });
      };
      auto it = std::find_if(clusters.begin(), clusters.end(), fits);
      if (it == clusters.end()) clusters.push_back({idx});
      else it->push_back(idx);
    }
  }

  // Members were appended in rank order, so the first is the representative
  // and clusters are already ordered by representative.
  std::vector<PredictionGroup> groups;
  groups.reserve(clusters.size());
  for (const auto& c : clusters) {
    PredictionGroup g;
    for (std::size_t idx : c) {
      g.members.push_back(preds[idx]);
      g.indices.push_back(idx);
    }
    g.representative = g.members.front();
    g.representative_index = g.indices.front();
    groups.push_back(std::move(g));
  }
  return groups;
}

std::vector<ScoredText> split_spans(const ScoredText& representative) {
  std::vector<ScoredText> out;
  auto emit = [&](std::string_view piece) {
    piece = text::trim(piece);
    if (!piece.empty()) out.push_back({std::string(piece), representative.score});
  };
  const std::string_view whole = representative.text;
  std::size_t start = 0;
  while (start <= whole.size()) {
    std::size_t end = whole.find(',', start);
    if (end == std::string_view::npos) end = whole.size();
    const auto piece = whole.substr(start, end - start);
    start = end + 1;

    // cut at standalone "and", keeping the original spacing inside each span
    const auto tokens = text::split_whitespace(piece);
    const char* span_begin = nullptr;
    const char* span_end = nullptr;
    for (auto tok : tokens) {
      if (text::to_lower(tok) == "and") {
        if (span_begin) emit(std::string_view(span_begin, static_cast<std::size_t>(span_end - span_begin)));
        span_begin = span_end = nullptr;
        continue;
      }
      if (!span_begin) span_begin = tok.data();
      span_end = tok.data() + tok.size();
    }
    if (span_begin) emit(std::string_view(span_begin, static_cast<std::size_t>(span_end - span_begin)));
  }
  return out;
}

std::vector<ScoredText> postprocess_predictions(std::vector<ScoredText> raw, const SimilarityProvider& sim,
                                                const PostprocessOptions& options) {
  const WordList& stopwords = options.stopwords ? *options.stopwords : WordList::builtin_stopwords();
  const WordList& refusals = options.refusals ? *options.refusals : WordList::builtin_refusals();

  auto kept = filter_low_score(std::move(raw), options.min_score);
  kept = drop_refusals(std::move(kept), refusals);
  std::erase_if(kept, [&](const ScoredText& p) { return !normalize(p.text, stopwords); });

  std::vector<ScoredText> out;
  for (const auto& group : group_similar(kept, sim, options.grouping_threshold, options.linkage, stopwords)) {
    for (auto& value : split_spans(group.representative)) out.push_back(std::move(value));
  }
  return out;
}

}  // namespace clinkg
