#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace framebench::text {

/// Splits on Unicode whitespace (ASCII space/tab/newline family, NEL, NBSP,
/// ogham space, U+2000..U+200A, line/paragraph separators, narrow NBSP,
/// medium math space, ideographic space). Punctuation stays attached.
std::vector<std::string_view> split_words(std::string_view s);

inline int count_words(std::string_view s) {
  return static_cast<int>(split_words(s).size());
}

/// Number of non-overlapping occurrences of `needle` in `haystack`.
std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::vector<std::string> split(std::string_view s, char sep);

}  // namespace framebench::text
