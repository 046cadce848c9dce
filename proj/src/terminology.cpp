#include "clinkg/terminology.hpp"

#include <json.hpp>

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

#include "clinkg/errors.hpp"
#include "clinkg/text.hpp"

namespace clinkg {

using nlohmann::json;

AliasTable::AliasTable(std::map<std::string, std::vector<std::string>> entries) {
  for (auto& [key, aliases] : entries) {
    auto& slot = entries_[text::to_lower(text::trim(key))];
    slot.insert(slot.end(), aliases.begin(), aliases.end());
  }
}

AliasTable AliasTable::from_file(const std::string& path) {
  return from_json_text(text::read_file(path), path);
}

AliasTable AliasTable::from_json_text(std::string_view content, const std::string& source) {
  json doc;
  try {
    doc = json::parse(content);
  } catch (const json::parse_error& e) {
    throw InputError(source, 0, std::string("malformed alias table: ") + e.what());
  }
  if (!doc.is_object()) throw InputError(source, 0, "alias table must be a JSON object");
  std::map<std::string, std::vector<std::string>> entries;
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_array()) throw InputError(source, 0, "aliases of \"" + key + "\" must be a list");
    auto& list = entries[key];
    for (const auto& alias : value) {
      if (!alias.is_string()) throw InputError(source, 0, "aliases of \"" + key + "\" must be strings");
      list.push_back(alias.get<std::string>());
    }
  }
  return AliasTable(std::move(entries));
}

std::optional<std::vector<std::string>> AliasTable::expand(std::string_view disease) const {
  const auto it = entries_.find(text::to_lower(text::trim(disease)));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

DiseaseConcept expand_aliases(std::string_view disease, const AliasProvider& provider) {
  if (text::trim(disease).empty()) throw std::invalid_argument("expand_aliases: empty disease");
  DiseaseConcept concept_;
  concept_.canonical = std::string(text::trim(disease));

  std::optional<std::vector<std::string>> found;
  try {
    found = provider.expand(concept_.canonical);
  } catch (const ProviderError&) {
    throw;
  } catch (const std::exception& e) {
    throw ProviderError(provider.name(), e.what());
  }

  std::unordered_set<std::string> seen;
  auto add = [&](std::string_view alias) {
    alias = text::trim(alias);
    if (alias.empty()) return;
    if (seen.insert(text::to_lower(alias)).second) concept_.aliases.emplace_back(alias);
  };
  add(concept_.canonical);
  if (found) {
    for (const auto& alias : *found) add(alias);
  } else {
    concept_.unknown = true;
  }
  return concept_;
}

LexiconNerProvider::LexiconNerProvider(std::vector<std::string> terms) {
  for (auto& t : terms) {
    if (!text::trim(t).empty()) terms_.emplace_back(text::trim(t));
  }
}

std::vector<NerSpan> LexiconNerProvider::extract(std::string_view note) const {
  std::vector<NerSpan> spans;
  const std::string hay = text::to_lower(note);
  for (const auto& term : terms_) {
    const std::string pat = text::to_lower(term);
    for (std::size_t pos = hay.find(pat); pos != std::string::npos; pos = hay.find(pat, pos + 1)) {
      const std::size_t end = pos + pat.size();
      const bool left_ok = pos == 0 || !text::is_word_byte(hay[pos - 1]);
      const bool right_ok = end == hay.size() || !text::is_word_byte(hay[end]);
      if (left_ok && right_ok) spans.push_back({std::string(note.substr(pos, pat.size())), pos, end});
    }
  }
  std::sort(spans.begin(), spans.end(), [](const NerSpan& a, const NerSpan& b) {
    return a.start != b.start ? a.start < b.start : a.end < b.end;
  });
  return spans;
}

void validate_spans(std::string_view text, const std::vector<NerSpan>& spans,
                    const std::string& provider) {
  for (const auto& span : spans) {
    if (span.start >= span.end || span.end > text.size()) {
      throw ProviderError(provider, "span [" + std::to_string(span.start) + ", " +
                                        std::to_string(span.end) + ") is out of range");
    }
    if (text.substr(span.start, span.end - span.start) != span.text) {
      throw ProviderError(provider, "span text \"" + span.text + "\" does not match the note");
    }
  }
}

std::vector<NoteMatch> identify_disease_notes(const Corpus& corpus, const DiseaseConcept& concept_,
                                              const NerProvider& ner, const SimilarityProvider& sim,
                                              double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("identify_disease_notes: threshold must be in [0, 1]");
  }
  std::vector<NoteMatch> result;
  for (const auto& note : corpus) {
    const auto alias = std::find_if(concept_.aliases.begin(), concept_.aliases.end(),
                                    [&](const std::string& a) { return text::contains_token_span(note.text(), a); });
    if (alias != concept_.aliases.end()) {
      result.push_back({note, NoteMatch::Via::Alias, *alias, 1.0});
      continue;
    }

    std::vector<NerSpan> mentions;
    try {
      mentions = ner.extract(note.text());
    } catch (const std::exception& e) {
      throw ProviderError(ner.name(), "note " + note.id() + ": " + e.what());
    }
    validate_spans(note.text(), mentions, ner.name());

    for (const auto& mention : mentions) {
      if (text::canonical(mention.text).empty()) continue;
      double score = 0.0;
      try {
        score = similarity(sim, mention.text, concept_.canonical);
      } catch (const std::invalid_argument&) {
        continue;  // degenerate mention, nothing to compare
      } catch (const std::exception& e) {
        throw ProviderError(sim.name(), "note " + note.id() + ": " + e.what());
      }
      if (score > threshold) {
        result.push_back({note, NoteMatch::Via::Similarity, mention.text, score});
        break;
      }
    }
  }
  return result;
}

}  // namespace clinkg
