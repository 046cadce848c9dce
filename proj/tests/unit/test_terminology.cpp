#include <doctest.h>

#include "clinkg/errors.hpp"
#include "clinkg/terminology.hpp"
#include "support.hpp"

using namespace clinkg;

namespace {

const AliasTable& amd_aliases() {
  static const AliasTable table = AliasTable::from_json_text(
      R"({"Macular Degeneration": ["ARMD", "amd", "age-related macular degeneration", "armd"]})");
  return table;
}

Corpus corpus_of(std::initializer_list<std::pair<const char*, const char*>> notes) {
  Corpus c;
  for (const auto& [id, text] : notes) c.add(ClinicalNote(id, text));
  return c;
}

}  // namespace

TEST_SUITE("terminology") {
  TEST_CASE("alias expansion is case-insensitive and deduplicated") {
    const auto concept_ = expand_aliases("macular degeneration", amd_aliases());
    CHECK(concept_.canonical == "macular degeneration");
    CHECK_FALSE(concept_.unknown);
    CHECK(concept_.aliases ==
          std::vector<std::string>{"macular degeneration", "ARMD", "amd", "age-related macular degeneration"});
  }

  TEST_CASE("unknown disease keeps only its own name") {
    const auto concept_ = expand_aliases("glaucoma", amd_aliases());
    CHECK(concept_.unknown);
    CHECK(concept_.aliases == std::vector<std::string>{"glaucoma"});
    CHECK_THROWS_AS(expand_aliases("  ", amd_aliases()), std::invalid_argument);
  }

  TEST_CASE("malformed alias tables are input errors") {
    CHECK_THROWS_AS(AliasTable::from_json_text("[1,2]"), InputError);
    CHECK_THROWS_AS(AliasTable::from_json_text(R"({"a": "b"})"), InputError);
    CHECK_THROWS_AS(AliasTable::from_json_text("{"), InputError);
  }

  TEST_CASE("lexicon NER reports token-bounded spans") {
    const LexiconNerProvider ner({"macular degenration", "glaucoma"});
    const std::string note = "Findings consistent with Macular Degenration OU; no glaucomatous change.";
    const auto spans = ner.extract(note);
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].text == "Macular Degenration");
    CHECK(note.substr(spans[0].start, spans[0].end - spans[0].start) == spans[0].text);
    CHECK_NOTHROW(validate_spans(note, spans, "lexicon"));
  }

  TEST_CASE("span validation rejects offsets that do not match") {
    CHECK_THROWS_AS(validate_spans("abc", {{"abc", 0, 4}}, "remote"), ProviderError);
    CHECK_THROWS_AS(validate_spans("abc", {{"ab", 1, 3}}, "remote"), ProviderError);
    CHECK_THROWS_AS(validate_spans("abc", {{"", 2, 2}}, "remote"), ProviderError);
  }

  TEST_CASE("notes are found by alias") {
    const auto concept_ = expand_aliases("macular degeneration", amd_aliases());
    const auto corpus = corpus_of({{"a", "Dry ARMD OU"}, {"b", "Glaucoma suspect"}, {"c", "history of armd."}});
    const auto matches = identify_disease_notes(corpus, concept_, NullNerProvider{}, TrigramProvider{});
    REQUIRE(matches.size() == 2);
    CHECK(matches[0].note.id() == "a");
    CHECK(matches[0].via == NoteMatch::Via::Alias);
    CHECK(matches[1].note.id() == "c");
  }

  TEST_CASE("alias matching respects token boundaries") {
    const auto concept_ = expand_aliases("macular degeneration", amd_aliases());
    const auto corpus = corpus_of({{"a", "Patient at CAMDEN clinic"}});
    CHECK(identify_disease_notes(corpus, concept_, NullNerProvider{}, TrigramProvider{}).empty());
  }

  TEST_CASE("misspelled mention is found through NER similarity") {
    // similarity 0.86518... from tests/oracles/trigram_oracle.py
    const auto concept_ = expand_aliases("macular degeneration", amd_aliases());
    const auto corpus = corpus_of({{"a", "Findings consistent with macular degenration OU."}});
    const LexiconNerProvider ner({"macular degenration"});
    const auto matches = identify_disease_notes(corpus, concept_, ner, TrigramProvider{}, 0.8);
    REQUIRE(matches.size() == 1);
    CHECK(matches[0].via == NoteMatch::Via::Similarity);
    CHECK(matches[0].evidence == "macular degenration");
    CHECK(matches[0].score == doctest::Approx(0.86518091269740038).epsilon(1e-12));
    // a stricter threshold excludes it
    CHECK(identify_disease_notes(corpus, concept_, ner, TrigramProvider{}, 0.9).empty());
  }

  TEST_CASE("a mention equal to the threshold is not enough") {
    const DiseaseConcept concept_{"disease x", {"disease x"}, false};
    const ScriptedProvider sim({{"disease x", {1.0, 0.0}}, {"mention", {3.0, 4.0}}});
    const LexiconNerProvider ner({"mention"});
    const auto corpus = corpus_of({{"a", "a mention here"}});
    CHECK(identify_disease_notes(corpus, concept_, ner, sim, 0.6).empty());
    CHECK(identify_disease_notes(corpus, concept_, ner, sim, 0.59).size() == 1);
  }
}
