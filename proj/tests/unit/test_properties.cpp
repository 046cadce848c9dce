#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "aggregation_oracle.hpp"
#include "clinkg/extraction.hpp"
#include "clinkg/postprocess.hpp"
#include "dedup_property.hpp"

using namespace clinkg;

TEST_SUITE("properties") {
  TEST_CASE("dedup contract on random corpora") {
    std::mt19937_64 rng(20240611);
    const TrigramProvider sim;
    std::size_t dropped = 0;
    for (int round = 0; round < 40; ++round) {
      const auto corpus = testsupport::random_corpus(rng);
      INFO("round " << round);
      CHECK(testsupport::check_dedup_properties(corpus, sim) == "");
      dropped += preprocess(corpus, sim).dropped.size();
    }
    CHECK(dropped > 0);
  }

  TEST_CASE("dedup keeps the longer note of a pair") {
    Corpus c;
    c.add(ClinicalNote("a", "dry armd stable monitor amsler grid"));
    c.add(ClinicalNote("b", "dry armd stable monitor amsler grid daily"));
    const auto r = preprocess(c, TrigramProvider{});
    REQUIRE(r.dropped.size() == 1);
    CHECK(r.dropped[0].id == "a");
    CHECK(r.dropped[0].kept_id == "b");
  }

  TEST_CASE("aggregation matches the naive oracle") {
    std::mt19937_64 rng(7);
    for (int round = 0; round < 200; ++round) {
      const auto preds = testsupport::random_predictions(rng);
      INFO("round " << round);
      CHECK(testsupport::as_oracle_edges(aggregate_relations(preds)) == testsupport::naive_aggregate(preds, 10, 0.1));
      CHECK(testsupport::as_oracle_edges(aggregate_relations(preds, {3, 0.25})) ==
            testsupport::naive_aggregate(preds, 3, 0.25));
    }
  }

  TEST_CASE("aggregation ignores input order") {
    std::mt19937_64 rng(11);
    for (int round = 0; round < 50; ++round) {
      auto preds = testsupport::random_predictions(rng);
      const auto before = aggregate_relations(preds, {2, 0.1});
      std::shuffle(preds.begin(), preds.end(), rng);
      CHECK(aggregate_relations(preds, {2, 0.1}) == before);
    }
  }

  TEST_CASE("aggregation output is one category per entity and within thresholds") {
    std::mt19937_64 rng(13);
    for (int round = 0; round < 50; ++round) {
      const auto out = aggregate_relations(testsupport::random_predictions(rng));
      for (std::size_t i = 0; i < out.size(); ++i) {
        CHECK(out[i].count >= 10);
        CHECK(out[i].avg_score >= 0.1);
        for (std::size_t j = i + 1; j < out.size(); ++j) {
          CHECK_FALSE((out[i].disease == out[j].disease && out[i].entity == out[j].entity));
        }
      }
    }
  }

  TEST_CASE("grouping partitions its input") {
    std::mt19937_64 rng(17);
    static const std::vector<std::string> words = {"areds", "vitamins", "fish", "spinach", "diet", "healthy",
                                                   "omega", "zinc"};
    std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
    std::uniform_int_distribution<int> score(0, 100);
    for (int round = 0; round < 50; ++round) {
      std::vector<ScoredText> preds;
      const std::size_t n = 1 + pick(rng) * 3;
      for (std::size_t i = 0; i < n; ++i) {
        preds.push_back({words[pick(rng)] + " " + words[pick(rng)], score(rng) / 100.0});
      }
      for (auto linkage : {Linkage::Single, Linkage::Complete}) {
        const auto groups = group_similar(preds, TrigramProvider{}, 0.8, linkage);
        std::vector<std::size_t> seen;
        for (const auto& g : groups) {
          for (std::size_t k = 0; k < g.members.size(); ++k) {
            CHECK(g.members[k] == preds[g.indices[k]]);
            CHECK(g.members[k].score <= g.representative.score);
          }
          seen.insert(seen.end(), g.indices.begin(), g.indices.end());
        }
        std::sort(seen.begin(), seen.end());
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), 0);
        CHECK(seen == all);
      }
    }
  }
}
