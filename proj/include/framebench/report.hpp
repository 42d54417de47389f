#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "framebench/metrics.hpp"

namespace framebench {

inline constexpr std::string_view kManifestSchema = "framebench-manifest/1";

/// Rows of the main results table.
enum class TableRow { NoPrefix, Control, Hierarchical, SocialContract, Emotional, Narrative, Overall };

inline constexpr TableRow kAllRows[] = {TableRow::NoPrefix,       TableRow::Control,   TableRow::Hierarchical,
                                        TableRow::SocialContract, TableRow::Emotional, TableRow::Narrative,
                                        TableRow::Overall};

std::string_view to_string(TableRow r) noexcept;    // "no-prefix", "control", "Hierarchical", ..., "overall"
std::string_view row_title(TableRow r) noexcept;    // "No-Prefix Baseline", ...
TableRow row_of(Mechanism m) noexcept;

struct ModelResults {
  std::string model_id;
  std::map<TableRow, Distribution> rows;
  std::map<Strategy, Distribution> strategies;
  std::uint64_t unjudged = 0;
};

/// Per-model distributions for every row and strategy with data, in the
/// given model order. Models without trials are rejected.
std::vector<ModelResults> summarize(std::span<const ScoredTrial> trials, std::span<const std::string> models);

/// One decimal, half-up; never prints "-0.0".
std::string format_pct(double x);
/// Two decimals, half-up (correlation coefficients).
std::string format_rho(double x);

/// Markdown table: one row per requested TableRow, one column per model plus
/// an Average column when there are two or more models. Each cell is
/// "framed / both<br>prior / neither". Throws Error(Invalid) naming a missing
/// (model, row) cell.
std::string emit_main_table(std::span<const ModelResults> models, std::span<const TableRow> rows);

/// CSV of control-baseline vs overall-prefix framed rates per model with
/// absolute and relative boosts, plus an Average row (the relative average is
/// the mean of the per-model relatives).
std::string emit_boost_table(std::span<const ModelResults> models);

/// CSV matrix of Spearman rho over the 13 per-strategy framed rates, with
/// stars; "--" on the diagonal and "n/a" where a model's rates are constant.
/// Needs two or more models with full strategy coverage.
std::string emit_correlation_matrix(std::span<const ModelResults> models);

/// CSV with one row per (strategy, model), strategies ordered by their
/// cross-model average framed rate. Needs all 13 strategies for every model.
std::string emit_figure_data(std::span<const ModelResults> models);

inline constexpr std::string_view kMainTableFile = "main_table.md";
inline constexpr std::string_view kBoostTableFile = "boost_table.csv";
inline constexpr std::string_view kCorrelationsFile = "correlations.csv";
inline constexpr std::string_view kFigureFile = "strategy_figure.csv";
inline constexpr std::string_view kManifestFile = "manifest.json";

struct ReportBundle {
  std::map<std::string, std::string> files;    // file name -> contents
  std::map<std::string, std::string> omitted;  // file name -> reason
  nlohmann::json manifest;
};

/// Emits every table the data supports. A table the data cannot fill is
/// listed under "omitted" with the reason instead of failing the report.
/// `manifest` is extended with the file list, their digests and omissions.
ReportBundle build_report(std::span<const ModelResults> models, nlohmann::json manifest);

/// Writes the bundle into `dir`, replacing earlier report files.
void write_report(const ReportBundle& bundle, const std::filesystem::path& dir);

}  // namespace framebench
