#include "clinkg/text.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "clinkg/errors.hpp"

namespace clinkg::text {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_ascii_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return (u >= 0x21 && u <= 0x2F) || (u >= 0x3A && u <= 0x40) || (u >= 0x5B && u <= 0x60) ||
         (u >= 0x7B && u <= 0x7E);
}

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = lower(c);
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_whitespace(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    const std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::size_t word_count(std::string_view s) { return split_whitespace(s).size(); }

bool is_word_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

std::string canonical(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (c == '\'') continue;
    if (is_space(c) || is_ascii_punct(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(lower(c));
  }
  return out;
}

bool contains_token_span(std::string_view haystack, std::string_view needle) {
  needle = trim(needle);
  if (needle.empty() || needle.size() > haystack.size()) return false;
  const std::string hay = to_lower(haystack);
  const std::string pat = to_lower(needle);
  for (std::size_t pos = hay.find(pat); pos != std::string::npos; pos = hay.find(pat, pos + 1)) {
    const bool left_ok = pos == 0 || !is_word_byte(hay[pos - 1]) || !is_word_byte(pat.front());
    const std::size_t end = pos + pat.size();
    const bool right_ok = end == hay.size() || !is_word_byte(hay[end]) || !is_word_byte(pat.back());
    if (left_ok && right_ok) return true;
  }
  return false;
}

std::string substitute(std::string_view pattern, std::string_view value) {
  std::string out;
  out.reserve(pattern.size() + value.size());
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (pattern[i] == '%' && i + 1 < pattern.size() && pattern[i + 1] == 's') {
      out.append(value);
      ++i;
    } else {
      out.push_back(pattern[i]);
    }
  }
  return out;
}

std::vector<std::string> parse_line_list(std::string_view content) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    const auto entry = trim(content.substr(start, end - start));
    if (!entry.empty() && !entry.starts_with('#')) out.emplace_back(entry);
    start = end + 1;
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path, 0, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::uint32_t fnv1a32(std::string_view data) {
  std::uint32_t h = 0x811C9DC5u;
  for (char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x01000193u;
  }
  return h;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << value;
  return out.str();
}

}  // namespace clinkg::text
