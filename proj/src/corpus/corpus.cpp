#include <set>

#include "framebench/corpus.hpp"
#include "framebench/error.hpp"
#include "framebench/hash.hpp"
#include "framebench/jsonl.hpp"
#include "framebench/text.hpp"

namespace framebench {

using jsonl::json;

namespace {

std::string where(const std::filesystem::path& file, std::size_t line) {
  return file.filename().string() + ":" + std::to_string(line);
}

std::string require_string(const json& rec, const char* field, const std::filesystem::path& file,
                           std::size_t line) {
  auto it = rec.find(field);
  if (it == rec.end() || !it->is_string()) {
    throw Error(ErrorKind::Parse,
                where(file, line) + ": malformed record: missing string field \"" + field + "\"");
  }
  std::string value = it->get<std::string>();
  if (value.empty()) {
    throw Error(ErrorKind::Parse,
                where(file, line) + ": malformed record: empty field \"" + field + "\"");
  }
  return value;
}

void check_kind(const jsonl::Document& doc, std::string_view kind, const std::filesystem::path& file) {
  auto it = doc.header.find("kind");
  if (it != doc.header.end() && (!it->is_string() || it->get<std::string>() != kind)) {
    throw Error(ErrorKind::Parse, file.filename().string() + ": header kind is not \"" +
                                      std::string(kind) + "\"");
  }
}

template <typename T>
const T* find_by_id(const std::vector<T>& items, std::string_view id) noexcept {
  for (const auto& item : items) {
    if (item.id == id) return &item;
  }
  return nullptr;
}

}  // namespace

const InfluencePrefix* Corpus::find_prefix(std::string_view id) const noexcept {
  return find_by_id(prefixes, id);
}
const DirectivePair* Corpus::find_pair(std::string_view id) const noexcept {
  return find_by_id(pairs, id);
}
const ControlText* Corpus::find_control(std::string_view id) const noexcept {
  return find_by_id(controls, id);
}

std::vector<char> rubric_label_problems(std::string_view rubric) {
  std::vector<char> bad;
  for (char label : {'X', 'Y', 'B', 'N'}) {
    const std::string token = std::string("\"") + label + "\"";
    if (text::count_occurrences(rubric, token) != 1) bad.push_back(label);
  }
  return bad;
}

CorpusLoad load_corpus(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorKind::Corpus, "corpus directory not found: " + dir.string());
  }
  CorpusLoad out;
  std::set<std::string> ids;
  auto claim_id = [&](const std::string& id, const std::filesystem::path& file, std::size_t line) {
    if (!ids.insert(id).second) {
      throw Error(ErrorKind::Corpus, where(file, line) + ": duplicate id \"" + id + "\"");
    }
  };

  const auto prefix_file = dir / kPrefixesFile;
  const auto prefix_doc = jsonl::read(prefix_file, kCorpusSchema);
  check_kind(prefix_doc, "prefixes", prefix_file);
  if (prefix_doc.records.empty()) out.warnings.push_back(prefix_file.filename().string() + ": no prefixes");
  for (const auto& rec : prefix_doc.records) {
    InfluencePrefix p;
    p.id = require_string(rec.value, "id", prefix_file, rec.line);
    p.text = require_string(rec.value, "text", prefix_file, rec.line);
    const std::string label = require_string(rec.value, "strategy", prefix_file, rec.line);
    auto strategy = parse_strategy(label);
    if (!strategy) {
      throw Error(ErrorKind::Corpus,
                  where(prefix_file, rec.line) + ": unknown strategy label \"" + label + "\"");
    }
    p.strategy = *strategy;
    p.word_count = text::count_words(p.text);
    claim_id(p.id, prefix_file, rec.line);
    if (p.word_count < kMinPrefixWords || p.word_count > kMaxPrefixWords) {
      out.warnings.push_back(where(prefix_file, rec.line) + ": prefix \"" + p.id + "\" has " +
                             std::to_string(p.word_count) + " words, outside [" +
                             std::to_string(kMinPrefixWords) + ", " +
                             std::to_string(kMaxPrefixWords) + "]");
    }
    out.corpus.prefixes.push_back(std::move(p));
  }

  const auto pair_file = dir / kPairsFile;
  const auto pair_doc = jsonl::read(pair_file, kCorpusSchema);
  check_kind(pair_doc, "pairs", pair_file);
  if (pair_doc.records.empty()) out.warnings.push_back(pair_file.filename().string() + ": no pairs");
  for (const auto& rec : pair_doc.records) {
    DirectivePair pair;
    pair.id = require_string(rec.value, "id", pair_file, rec.line);
    pair.directive_a = require_string(rec.value, "directive_a", pair_file, rec.line);
    pair.directive_b = require_string(rec.value, "directive_b", pair_file, rec.line);
    pair.judge_rubric = require_string(rec.value, "judge_rubric", pair_file, rec.line);
    claim_id(pair.id, pair_file, rec.line);
    if (const auto bad = rubric_label_problems(pair.judge_rubric); !bad.empty()) {
      throw Error(ErrorKind::Corpus, where(pair_file, rec.line) + ": rubric of \"" + pair.id +
                                         "\" must contain \"" + std::string(1, bad.front()) +
                                         "\" exactly once");
    }
    if (pair.directive_a == pair.directive_b) {
      throw Error(ErrorKind::Corpus,
                  where(pair_file, rec.line) + ": directive_a equals directive_b in \"" + pair.id + "\"");
    }
    out.corpus.pairs.push_back(std::move(pair));
  }

  const auto control_file = dir / kControlsFile;
  const auto control_doc = jsonl::read(control_file, kCorpusSchema);
  check_kind(control_doc, "controls", control_file);
  for (const auto& rec : control_doc.records) {
    ControlText c;
    c.id = require_string(rec.value, "id", control_file, rec.line);
    c.text = require_string(rec.value, "text", control_file, rec.line);
    claim_id(c.id, control_file, rec.line);
    out.corpus.controls.push_back(std::move(c));
  }
  return out;
}

std::string serialize_prefixes(std::span<const InfluencePrefix> prefixes) {
  std::string out = jsonl::header(kCorpusSchema, {{"kind", "prefixes"}});
  for (const auto& p : prefixes) {
    out += jsonl::line({{"id", p.id},
                        {"strategy", std::string(to_string(p.strategy))},
                        {"text", p.text},
                        {"word_count", p.word_count}});
  }
  return out;
}

std::string serialize_pairs(std::span<const DirectivePair> pairs) {
  std::string out = jsonl::header(kCorpusSchema, {{"kind", "pairs"}});
  for (const auto& p : pairs) {
    out += jsonl::line({{"id", p.id},
                        {"directive_a", p.directive_a},
                        {"directive_b", p.directive_b},
                        {"judge_rubric", p.judge_rubric}});
  }
  return out;
}

std::string serialize_controls(std::span<const ControlText> controls) {
  std::string out = jsonl::header(kCorpusSchema, {{"kind", "controls"}});
  for (const auto& c : controls) out += jsonl::line({{"id", c.id}, {"text", c.text}});
  return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  jsonl::write_atomic(dir / kPrefixesFile, serialize_prefixes(corpus.prefixes));
  jsonl::write_atomic(dir / kPairsFile, serialize_pairs(corpus.pairs));
  jsonl::write_atomic(dir / kControlsFile, serialize_controls(corpus.controls));
}

std::string corpus_digest(const Corpus& corpus) {
  return sha256_hex(serialize_prefixes(corpus.prefixes) + serialize_pairs(corpus.pairs) +
                    serialize_controls(corpus.controls));
}

}  // namespace framebench
