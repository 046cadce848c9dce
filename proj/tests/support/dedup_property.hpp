#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "clinkg/corpus.hpp"
#include "clinkg/similarity.hpp"

namespace testsupport {

/// Random corpus of up to `max_notes` notes. About half are near copies of an
/// earlier note with a word added, removed or swapped, so the duplicate
/// branch is exercised; a few are too short or punctuation only.
inline clinkg::Corpus random_corpus(std::mt19937_64& rng, std::size_t max_notes = 100) {
  static const std::vector<std::string> vocab = {
      "dry",   "wet",     "armd",    "drusen",  "areds", "vitamins", "patient", "reports", "vision",
      "loss",  "monitor", "amsler",  "grid",    "fish",  "spinach",  "smoker",  "family",  "history",
      "OU",    "OD",      "OS",      "stable",  "exam",  "return",   "months",  "diet",    "injection",
      "eylea", "lucentis", "avastin", "glaucoma", "iop",  "drops",    "follow",  "up",      "advised"};
  std::uniform_int_distribution<std::size_t> count_dist(0, max_notes);
  std::uniform_int_distribution<std::size_t> len_dist(2, 24);
  std::uniform_int_distribution<std::size_t> word(0, vocab.size() - 1);
  std::uniform_int_distribution<int> coin(0, 99);

  std::vector<std::vector<std::string>> bodies;
  clinkg::Corpus corpus;
  const std::size_t n = count_dist(rng);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> words;
    const int roll = coin(rng);
    if (!bodies.empty() && roll < 50) {
      words = bodies[std::uniform_int_distribution<std::size_t>(0, bodies.size() - 1)(rng)];
      const int edit = coin(rng) % 3;
      if (edit == 0 || words.empty()) words.push_back(vocab[word(rng)]);
      else if (edit == 1) words.erase(words.begin() + static_cast<long>(word(rng) % words.size()));
      else words[word(rng) % words.size()] = vocab[word(rng)];
    } else if (roll < 53) {
      words = {"...", "--", "!!", "??", ";;"};
    } else {
      const std::size_t len = len_dist(rng);
      for (std::size_t k = 0; k < len; ++k) words.push_back(vocab[word(rng)]);
    }
    std::string text;
    for (const auto& w : words) text += (text.empty() ? "" : " ") + w;
    if (text.empty()) text = "empty";
    bodies.push_back(words);
    corpus.add(clinkg::ClinicalNote("note" + std::to_string(i), text));
  }
  return corpus;
}

/// Checks the dedup contract on one corpus; returns a description of the
/// first violation, or an empty string.
inline std::string check_dedup_properties(const clinkg::Corpus& corpus, const clinkg::SimilarityProvider& sim,
                                          double threshold = 0.8) {
  clinkg::PreprocessOptions options;
  options.threshold = threshold;
  const auto result = clinkg::preprocess(corpus, sim, options);

  std::vector<const clinkg::ClinicalNote*> kept;
  for (const auto& note : result.corpus) kept.push_back(&note);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto u = sim.embed(kept[i]->text());
    if (u.is_zero()) continue;
    for (std::size_t j = i + 1; j < kept.size(); ++j) {
      const auto v = sim.embed(kept[j]->text());
      if (v.is_zero()) continue;
      const double s = clinkg::cosine(u, v);
      if (s > threshold) return kept[i]->id() + " and " + kept[j]->id() + " both kept at " + std::to_string(s);
    }
  }

  const auto again = clinkg::preprocess(result.corpus, sim, options);
  if (!again.dropped.empty() || again.corpus.size() != result.corpus.size()) return "second pass dropped notes";

  std::map<std::string, std::size_t> words;
  for (const auto& note : corpus) words[note.id()] = note.word_count();
  for (const auto& d : result.dropped) {
    if (d.reason == clinkg::DroppedNote::Reason::TooShort) {
      if (words[d.id] >= options.min_words) return d.id + " dropped as short";
      continue;
    }
    if (words[d.kept_id] < words[d.id]) return d.id + " dropped in favour of shorter " + d.kept_id;
    if (!(d.similarity > threshold)) return d.id + " dropped below the threshold";
  }
  if (result.corpus.size() + result.dropped.size() != corpus.size()) return "notes lost or duplicated";
  return {};
}

}  // namespace testsupport
