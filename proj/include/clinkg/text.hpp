#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Byte-level text helpers shared by every stage. Only ASCII is case-folded;
// bytes >= 0x80 are treated as word characters.
namespace clinkg::text {

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);
std::vector<std::string_view> split_whitespace(std::string_view s);
std::size_t word_count(std::string_view s);

bool is_word_byte(char c);

/// Lowercase, drop apostrophes, turn remaining ASCII punctuation into spaces
/// and collapse whitespace. "Don't know!" -> "dont know".
std::string canonical(std::string_view s);

/// Case-insensitive search for `needle` in `haystack` where the match is not
/// preceded or followed by a word byte.
bool contains_token_span(std::string_view haystack, std::string_view needle);

/// Replace every "%s" in `pattern` with `value`.
std::string substitute(std::string_view pattern, std::string_view value);

/// Parse a one-entry-per-line list; blank lines and lines starting with "#"
/// are skipped, entries trimmed.
std::vector<std::string> parse_line_list(std::string_view content);
std::string read_file(const std::string& path);

std::uint32_t fnv1a32(std::string_view data);
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t value);

}  // namespace clinkg::text
