#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "framebench/config.hpp"
#include "framebench/corpus.hpp"
#include "framebench/judge.hpp"
#include "framebench/metrics.hpp"
#include "framebench/report.hpp"
#include "framebench/runtime.hpp"

namespace framebench {

inline constexpr std::string_view kResponsesSchema = "framebench-responses/1";
inline constexpr std::string_view kMetricsSchema = "framebench-metrics/1";

inline constexpr std::string_view kPlanFile = "plan.jsonl";
inline constexpr std::string_view kResponsesFile = "responses.jsonl";
inline constexpr std::string_view kJudgmentsFile = "judgments.jsonl";
inline constexpr std::string_view kMetricsFile = "metrics.jsonl";
inline constexpr std::string_view kRunLogFile = "run_log.jsonl";
inline constexpr std::string_view kAuditFile = "audit.jsonl";
inline constexpr std::string_view kReportDir = "report";

using BackendFactory = std::function<std::shared_ptr<ChatBackend>(const ModelEndpoint&)>;

struct StageResult {
  std::size_t items = 0;
  std::size_t failures = 0;  // failed requests or unjudged trials
  std::size_t cache_hits = 0;
  std::size_t requests = 0;  // requests that reached a backend
  std::string summary;
};

/// The staged experiment. Each stage reads the previous stage's files from
/// the output directory and throws Error(Dependency) naming whichever is
/// missing. Every stage can be rerun; cached responses are never requested
/// again.
class Pipeline {
 public:
  /// Checks the config (judge disjointness included) before anything else.
  explicit Pipeline(RunConfig config, BackendFactory factory = make_backend, std::ostream* log = nullptr);

  StageResult plan();
  StageResult run();
  StageResult judge();
  StageResult analyze();
  StageResult report();
  /// plan, run, judge, analyze and report in sequence.
  std::vector<StageResult> all();

  /// Samples n judged trials (default config.audit_size) into
  /// <out>/audit.jsonl. Throws Error(Invalid) when fewer were judged.
  std::filesystem::path audit_export(std::optional<std::size_t> n = std::nullopt);
  /// Agreement between an annotated audit file and the stored judgments.
  double audit_score(const std::filesystem::path& annotated);

  const RunConfig& config() const noexcept { return config_; }
  std::filesystem::path path(std::string_view file) const { return config_.out / file; }

 private:
  const Corpus& corpus();
  std::shared_ptr<ChatBackend> backend_for(const ModelEndpoint& endpoint);
  BatchOptions batch_options(ResponseCache& cache, RunLog& log) const;
  void say(const std::string& line);

  RunConfig config_;
  BackendFactory factory_;
  std::ostream* log_;
  std::optional<Corpus> corpus_;
  std::map<std::string, std::shared_ptr<ChatBackend>> backends_;
};

/// Plan file entry: the spec with its trial key.
struct PlannedTrial {
  TrialSpec spec;
  std::string trial_key;
};

std::vector<PlannedTrial> read_plan(const std::filesystem::path& path, std::string* corpus_digest = nullptr);
std::vector<RawResponse> read_responses(const std::filesystem::path& path);
std::vector<Judgment> read_judgments(const std::filesystem::path& path);

/// Joins the plan with judgments into metrics input. Trials without a
/// judgment, or with a failed one, are unjudged.
std::vector<ScoredTrial> score_trials(std::span<const PlannedTrial> plan, std::span<const Judgment> judgments,
                                      const Corpus& corpus);

/// Rebuilds per-model report inputs from metrics.jsonl records.
std::vector<ModelResults> results_from_metrics(const std::filesystem::path& path,
                                               std::span<const std::string> models);

}  // namespace framebench
