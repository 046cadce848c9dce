#include "clinkg/word_list.hpp"

#include "clinkg/assets.hpp"
#include "clinkg/text.hpp"

namespace clinkg {

WordList::WordList(const std::vector<std::string>& entries) {
  for (const auto& e : entries) {
    auto c = text::canonical(e);
    if (!c.empty()) entries_.insert(std::move(c));
  }
}

WordList WordList::from_text(std::string_view content) { return WordList(text::parse_line_list(content)); }

WordList WordList::from_file(const std::string& path) { return from_text(text::read_file(path)); }

const WordList& WordList::builtin_stopwords() {
  static const WordList list = from_text(assets::stopwords());
  return list;
}

const WordList& WordList::builtin_refusals() {
  static const WordList list = from_text(assets::refusals());
  return list;
}

bool WordList::contains(std::string_view phrase) const {
  const auto c = text::canonical(phrase);
  return !c.empty() && entries_.contains(c);
}

}  // namespace clinkg
