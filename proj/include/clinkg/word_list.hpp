#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace clinkg {

/// Set of phrases compared in canonical form (see text::canonical), loaded
/// from a one-entry-per-line file.
class WordList {
 public:
  WordList() = default;
  explicit WordList(const std::vector<std::string>& entries);

  static WordList from_text(std::string_view content);
  static WordList from_file(const std::string& path);
  static const WordList& builtin_stopwords();
  static const WordList& builtin_refusals();

  /// True when canonical(phrase) is in the list.
  bool contains(std::string_view phrase) const;
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::set<std::string, std::less<>> entries_;
};

}  // namespace clinkg
