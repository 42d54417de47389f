#include <algorithm>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>

#include "framebench/corpus.hpp"
#include "framebench/error.hpp"
#include "framebench/text.hpp"

namespace framebench {

bool ValidationReport::has_errors() const noexcept { return count(Severity::Error) > 0; }

std::size_t ValidationReport::count(Severity s) const noexcept {
  return static_cast<std::size_t>(
      std::count_if(findings.begin(), findings.end(), [s](const Finding& f) { return f.severity == s; }));
}

std::string ValidationReport::to_text() const {
  std::ostringstream out;
  out << "prefixes: " << prefix_count << "\npairs: " << pair_count
      << "\ncontrols: " << control_count << "\n";
  if (length_stats) {
    out << "prefix words: min " << length_stats->min << ", max " << length_stats->max
        << ", median " << length_stats->median << ", mean " << length_stats->mean << "\n";
  }
  out << "mechanisms:\n";
  for (const auto& [m, n] : mechanism_counts) out << "  " << to_string(m) << ": " << n << "\n";
  out << "strategies:\n";
  for (const auto& [s, n] : strategy_counts) out << "  " << to_string(s) << ": " << n << "\n";
  out << "findings: " << findings.size() << " (" << count(Severity::Error) << " errors, "
      << count(Severity::Warning) << " warnings)\n";
  for (const auto& f : findings) {
    out << "  " << to_string(f.severity) << " [" << f.code << "] " << f.message << "\n";
  }
  return out.str();
}

ValidationReport validate_corpus(const Corpus& corpus, const ValidationTargets& targets) {
  ValidationReport report;
  report.prefix_count = corpus.prefixes.size();
  report.pair_count = corpus.pairs.size();
  report.control_count = corpus.controls.size();
  auto add = [&](Severity sev, std::string code, std::string msg) {
    report.findings.push_back({sev, std::move(code), std::move(msg)});
  };

  for (Strategy s : kAllStrategies) report.strategy_counts[s] = 0;
  for (Mechanism m : kAllMechanisms) report.mechanism_counts[m] = 0;

  std::set<std::string> ids;
  auto check_id = [&](const std::string& id) {
    if (!ids.insert(id).second) add(Severity::Error, "duplicate-id", "id \"" + id + "\" is used more than once");
  };

  std::map<std::string, std::string> first_with_text;
  std::vector<int> word_counts;
  for (const auto& p : corpus.prefixes) {
    check_id(p.id);
    ++report.strategy_counts[p.strategy];
    ++report.mechanism_counts[p.mechanism()];
    const int words = text::count_words(p.text);
    word_counts.push_back(words);
    if (words < targets.min_words || words > targets.max_words) {
      add(Severity::Warning, "word-count",
          "prefix \"" + p.id + "\" has " + std::to_string(words) + " words, outside the " +
              std::to_string(targets.min_words) + "-" + std::to_string(targets.max_words) +
              " word bound");
    }
    if (p.text.find_first_of("{}") != std::string::npos) {
      add(Severity::Error, "placeholder",
          "prefix \"" + p.id + "\" contains directive placeholder braces; prefixes must be task-agnostic");
    }
    auto [it, inserted] = first_with_text.emplace(p.text, p.id);
    if (!inserted) {
      add(Severity::Warning, "duplicate-text",
          "prefixes \"" + it->second + "\" and \"" + p.id + "\" have identical text");
    }
  }
  if (!word_counts.empty()) report.length_stats = length_stats(word_counts);

  if (corpus.prefixes.empty()) add(Severity::Warning, "empty", "corpus has no prefixes");
  for (const auto& [s, n] : report.strategy_counts) {
    if (std::abs(n - targets.per_strategy) > targets.per_strategy_tolerance) {
      add(Severity::Warning, "strategy-count",
          std::string(to_string(s)) + " has " + std::to_string(n) + " prefixes, target " +
              std::to_string(targets.per_strategy) + " +/- " +
              std::to_string(targets.per_strategy_tolerance));
    }
  }
  if (targets.total_prefixes &&
      static_cast<int>(corpus.prefixes.size()) != *targets.total_prefixes) {
    add(Severity::Warning, "total-count",
        "corpus has " + std::to_string(corpus.prefixes.size()) + " prefixes, target " +
            std::to_string(*targets.total_prefixes));
  }

  if (corpus.pairs.empty()) add(Severity::Warning, "empty", "corpus has no directive pairs");
  for (const auto& pair : corpus.pairs) {
    check_id(pair.id);
    for (char label : rubric_label_problems(pair.judge_rubric)) {
      add(Severity::Error, "rubric-labels",
          "rubric of \"" + pair.id + "\" must contain \"" + std::string(1, label) + "\" exactly once");
    }
    if (pair.directive_a == pair.directive_b) {
      add(Severity::Error, "identical-directives", "pair \"" + pair.id + "\" has identical directives");
    }
  }

  std::vector<int> control_counts;
  for (const auto& c : corpus.controls) {
    check_id(c.id);
    control_counts.push_back(text::count_words(c.text));
  }
  if (!control_counts.empty() && report.length_stats) {
    const auto cs = length_stats(control_counts);
    const auto& ps = *report.length_stats;
    if (cs.min != ps.min || cs.max != ps.max || cs.median != ps.median) {
      add(Severity::Warning, "control-length",
          "control word counts (min " + std::to_string(cs.min) + ", median " +
              std::to_string(cs.median) + ", max " + std::to_string(cs.max) +
              ") do not match the prefixes (min " + std::to_string(ps.min) + ", median " +
              std::to_string(ps.median) + ", max " + std::to_string(ps.max) + ")");
    }
  }
  return report;
}

}  // namespace framebench
