#include <algorithm>
#include <random>

#include "framebench/error.hpp"
#include "framebench/judge.hpp"
#include "framebench/jsonl.hpp"

namespace framebench {

using nlohmann::json;

std::vector<AuditRow> audit_sample(std::span<const AuditRow> population, std::size_t n, std::uint64_t seed) {
  if (n > population.size()) {
    throw Error(ErrorKind::Invalid, "audit sample of " + std::to_string(n) + " exceeds population of " +
                                        std::to_string(population.size()));
  }
  std::vector<AuditRow> sorted(population.begin(), population.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const AuditRow& a, const AuditRow& b) { return a.trial_key < b.trial_key; });
  if (std::adjacent_find(sorted.begin(), sorted.end(), [](const AuditRow& a, const AuditRow& b) {
        return a.trial_key == b.trial_key;
      }) != sorted.end()) {
    throw Error(ErrorKind::Invalid, "audit population repeats a trial key");
  }
  std::vector<AuditRow> out;
  out.reserve(n);
  std::mt19937_64 rng(seed);
  std::sample(sorted.begin(), sorted.end(), std::back_inserter(out), n, rng);
  return out;
}

std::string serialize_audit(std::span<const AuditRow> rows, std::uint64_t seed) {
  std::string out = jsonl::header(kAuditSchema, {{"seed", seed}, {"rows", rows.size()}});
  for (const auto& r : rows) {
    out += jsonl::line({{"trial_key", r.trial_key},
                        {"pair_id", r.pair_id},
                        {"rubric", r.rubric},
                        {"response_text", r.response_text},
                        {"human_label", nullptr}});
  }
  return out;
}

std::map<std::string, JudgeLabel> read_audit_labels(const std::filesystem::path& path) {
  const auto doc = jsonl::read(path, kAuditSchema);
  std::map<std::string, JudgeLabel> out;
  for (const auto& rec : doc.records) {
    const auto where = path.filename().string() + ":" + std::to_string(rec.line) + ": ";
    try {
      const auto key = rec.value.at("trial_key").get<std::string>();
      const auto& l = rec.value.at("human_label");
      if (l.is_null()) throw Error(ErrorKind::Parse, where + "row " + key + " is not labeled");
      const auto s = l.get<std::string>();
      auto label = s.size() == 1 ? label_from_char(s[0]) : std::nullopt;
      if (!label) throw Error(ErrorKind::Parse, where + "label \"" + s + "\" is not one of X/Y/B/N");
      if (!out.emplace(key, *label).second) throw Error(ErrorKind::Parse, where + "duplicate key " + key);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Parse, where + e.what());
    }
  }
  return out;
}

double audit_consistency(const std::map<std::string, JudgeLabel>& human,
                         const std::map<std::string, JudgeLabel>& judge) {
  if (human.empty()) throw Error(ErrorKind::Invalid, "no audit labels");
  std::size_t agree = 0;
  for (const auto& [key, label] : human) {
    auto it = judge.find(key);
    if (it == judge.end()) throw Error(ErrorKind::Invalid, "audit key " + key + " has no judge label");
    if (it->second == label) ++agree;
  }
  for (const auto& [key, label] : judge) {
    if (!human.contains(key)) throw Error(ErrorKind::Invalid, "judge key " + key + " has no human label");
  }
  return static_cast<double>(agree) / static_cast<double>(human.size());
}

}  // namespace framebench
