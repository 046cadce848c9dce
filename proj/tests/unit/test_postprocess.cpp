#include <doctest.h>

#include "clinkg/postprocess.hpp"
#include "postprocess_trace.hpp"

using namespace clinkg;
using testsupport::sorted_by_text;

TEST_SUITE("postprocess") {
  TEST_CASE("score filter keeps the boundary") {
    const std::vector<ScoredText> in{{"a", 0.01}, {"b", 0.08}, {"c", 0.14}};
    CHECK(filter_low_score(in, 0.08) == std::vector<ScoredText>{{"b", 0.08}, {"c", 0.14}});
    CHECK_THROWS_AS(filter_low_score(in, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(filter_low_score(in, -0.1), std::invalid_argument);
  }

  TEST_CASE("normalization") {
    CHECK(normalize("AREDS + WACS vitamins.") == "areds wacs vitamins");
    CHECK(normalize("the progression of the disease") == "progression disease");
    CHECK_FALSE(normalize("...").has_value());
    CHECK_FALSE(normalize("the and of").has_value());
  }

  TEST_CASE("refusals are dropped, other text is kept") {
    const std::vector<ScoredText> in{{"I do not know.", 0.9}, {"i dont know", 0.9}, {"unknown etiology", 0.3}};
    CHECK(drop_refusals(in) == std::vector<ScoredText>{{"unknown etiology", 0.3}});
  }

  TEST_CASE("dissimilar inputs stay apart") {
    const ScriptedProvider sim({{"x", {1.0, 0.0, 0.0}}, {"y", {0.0, 1.0, 0.0}}, {"z", {0.0, 0.0, 1.0}}});
    const auto groups = group_similar({{"x", 0.1}, {"y", 0.2}, {"z", 0.3}}, sim, 0.8);
    REQUIRE(groups.size() == 3);
    CHECK(groups[0].representative.text == "z");
    CHECK(groups[2].representative_index == 0);
  }

  TEST_CASE("identical texts merge under the highest score") {
    const auto groups = group_similar({{"AREDS", 0.2}, {"areds", 0.7}}, TrigramProvider{}, 0.8);
    REQUIRE(groups.size() == 1);
    CHECK(groups[0].representative == ScoredText{"areds", 0.7});
    CHECK(groups[0].indices == std::vector<std::size_t>{1, 0});
  }

  TEST_CASE("representative ties prefer longer text, then lexicographic") {
    const ScriptedProvider sim({{"ab", {1.0}}, {"abc", {1.0}}, {"abd", {1.0}}});
    const auto groups = group_similar({{"ab", 0.5}, {"abd", 0.5}, {"abc", 0.5}}, sim, 0.8);
    REQUIRE(groups.size() == 1);
    CHECK(groups[0].representative.text == "abc");
  }

  TEST_CASE("similarity equal to the threshold does not merge") {
    const ScriptedProvider sim({{"alpha", {1.0, 0.0}}, {"beta", {3.0, 4.0}}});
    CHECK(group_similar({{"alpha", 0.5}, {"beta", 0.4}}, sim, 0.6).size() == 2);
    CHECK(group_similar({{"alpha", 0.5}, {"beta", 0.4}}, sim, 0.59).size() == 1);
  }

  TEST_CASE("single linkage chains, complete linkage does not") {
    // alpha~beta and beta~gamma above 0.8, alpha and gamma at 0.62
    const ScriptedProvider sim({{"alpha", {1.0, 0.0}},
                                {"beta", {0.9, 0.4358898943540673}},
                                {"gamma", {0.62, 0.7846018098373212}}});
    const std::vector<ScoredText> in{{"alpha", 0.9}, {"beta", 0.5}, {"gamma", 0.4}};
    CHECK(group_similar(in, sim, 0.8, Linkage::Single).size() == 1);
    CHECK(group_similar(in, sim, 0.8, Linkage::Complete).size() == 2);
  }

  TEST_CASE("empty normalizations are rejected by grouping") {
    CHECK_THROWS_AS(group_similar({{"the", 0.5}}, TrigramProvider{}, 0.8), std::invalid_argument);
  }

  TEST_CASE("span splitting") {
    CHECK(split_spans({"areds vitamins, fish, spinach", 0.67}) ==
          std::vector<ScoredText>{{"areds vitamins", 0.67}, {"fish", 0.67}, {"spinach", 0.67}});
    CHECK(split_spans({"spinach and fish", 0.25}) == std::vector<ScoredText>{{"spinach", 0.25}, {"fish", 0.25}});
    CHECK(split_spans({"Omega-3  fatty acids AND diet", 0.5}) ==
          std::vector<ScoredText>{{"Omega-3  fatty acids", 0.5}, {"diet", 0.5}});
    CHECK(split_spans({"sandwiches", 0.5}) == std::vector<ScoredText>{{"sandwiches", 0.5}});
    CHECK(split_spans({" , and ,", 0.5}).empty());
  }

  TEST_CASE("worked example end to end") {
    const auto out = postprocess_predictions(testsupport::worked_example_raw(), testsupport::worked_example_provider());
    const auto got = sorted_by_text(out);
    const auto want = testsupport::worked_example_expected();
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].text == want[i].text);
      CHECK(std::abs(got[i].score - want[i].score) <= 1e-9);
    }
  }

  TEST_CASE("worked example grouping stage") {
    auto kept = filter_low_score(testsupport::worked_example_raw(), 0.08);
    CHECK(kept.size() == 7);
    const auto groups = group_similar(kept, testsupport::worked_example_provider(), 0.8);
    REQUIRE(groups.size() == 2);
    CHECK(groups[0].representative == ScoredText{"areds vitamins, fish, spinach", 0.67});
    CHECK(groups[1].representative == ScoredText{"healthy diet", 0.48});
    CHECK(groups[0].members.size() == 6);
  }
}
