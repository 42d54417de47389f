#include <algorithm>
#include <array>
#include <cctype>

#include "framebench/corpus.hpp"
#include "framebench/error.hpp"

namespace framebench {

namespace {

constexpr std::array<std::string_view, 69> kLorem = {
    "lorem", "ipsum", "dolor", "sit", "amet", "consectetur", "adipiscing", "elit", "sed",
    "do", "eiusmod", "tempor", "incididunt", "ut", "labore", "et", "dolore", "magna",
    "aliqua", "ut", "enim", "ad", "minim", "veniam", "quis", "nostrud", "exercitation",
    "ullamco", "laboris", "nisi", "ut", "aliquip", "ex", "ea", "commodo", "consequat",
    "duis", "aute", "irure", "dolor", "in", "reprehenderit", "in", "voluptate", "velit",
    "esse", "cillum", "dolore", "eu", "fugiat", "nulla", "pariatur", "excepteur", "sint",
    "occaecat", "cupidatat", "non", "proident", "sunt", "in", "culpa", "qui", "officia",
    "deserunt", "mollit", "anim", "id", "est", "laborum"};

}  // namespace

LengthStats length_stats(std::span<const int> word_counts) {
  if (word_counts.empty()) throw Error(ErrorKind::Invalid, "length statistics of an empty list");
  std::vector<int> sorted(word_counts.begin(), word_counts.end());
  std::sort(sorted.begin(), sorted.end());
  LengthStats s;
  s.min = sorted.front();
  s.max = sorted.back();
  s.median = sorted[(sorted.size() - 1) / 2];
  long long total = 0;
  for (int w : sorted) total += w;
  s.mean = static_cast<double>(total) / static_cast<double>(sorted.size());
  return s;
}

LengthStats corpus_stats(std::span<const InfluencePrefix> prefixes) {
  std::vector<int> counts;
  counts.reserve(prefixes.size());
  for (const auto& p : prefixes) counts.push_back(p.word_count);
  return length_stats(counts);
}

std::vector<ControlText> generate_controls(const LengthStats& stats, int n) {
  if (n < 3) {
    throw Error(ErrorKind::Invalid,
                "generate_controls: need at least 3 controls to match min, median and max");
  }
  if (stats.min < 1 || stats.min > stats.median || stats.median > stats.max) {
    throw Error(ErrorKind::Invalid, "generate_controls: require 1 <= min <= median <= max");
  }
  // Sorted word counts: endpoints pinned, lower-middle slot holds the median,
  // the rest interpolate linearly on either side of it.
  const int mid = (n - 1) / 2;
  const int upper_span = n - 1 - mid;
  std::vector<int> counts(static_cast<std::size_t>(n));
  counts.front() = stats.min;
  counts.back() = stats.max;
  counts[mid] = stats.median;
  for (int i = 1; i < mid; ++i) {
    counts[i] = stats.min + ((stats.median - stats.min) * i + mid / 2) / mid;
  }
  for (int i = mid + 1; i < n - 1; ++i) {
    counts[i] = stats.median + ((stats.max - stats.median) * (i - mid) + upper_span / 2) / upper_span;
  }

  const int width = std::max<int>(2, static_cast<int>(std::to_string(n).size()));
  std::vector<ControlText> out;
  out.reserve(counts.size());
  std::size_t cursor = 0;
  for (int i = 0; i < n; ++i) {
    std::string text;
    for (int w = 0; w < counts[i]; ++w) {
      if (w) text += ' ';
      text += kLorem[cursor++ % kLorem.size()];
    }
    text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
    std::string id = std::to_string(i + 1);
    id.insert(0, static_cast<std::size_t>(width) - std::min<std::size_t>(id.size(), width), '0');
    out.push_back({"lorem-" + id, std::move(text)});
  }
  return out;
}

}  // namespace framebench
