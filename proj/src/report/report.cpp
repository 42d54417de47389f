#include "framebench/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "framebench/error.hpp"
#include "framebench/hash.hpp"
#include "framebench/jsonl.hpp"

namespace framebench {

using nlohmann::json;

namespace {

struct RowInfo {
  TableRow row;
  std::string_view key;
  std::string_view title;
};

constexpr RowInfo kRowInfo[] = {
    {TableRow::NoPrefix, "no-prefix", "No-Prefix Baseline"},
    {TableRow::Control, "control", "Lorem Ipsum Baseline"},
    {TableRow::Hierarchical, "Hierarchical", "Hierarchical Prefix"},
    {TableRow::SocialContract, "SocialContract", "Social Contract Prefix"},
    {TableRow::Emotional, "Emotional", "Emotional Prefix"},
    {TableRow::Narrative, "Narrative", "Narrative Prefix"},
    {TableRow::Overall, "overall", "Overall Prefix"},
};

std::string format_fixed(double x, int decimals) {
  const double scale = decimals == 1 ? 10.0 : 100.0;
  // The epsilon keeps values like 0.15 (stored as 0.1499...) rounding up.
  double r = std::floor(x * scale + 0.5 + 1e-9) / scale;
  if (r == 0.0) r = 0.0;  // drops the sign of -0.0
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, r);
  return buf;
}

std::map<std::string, Distribution> aggregate_or_empty(std::span<const ScoredTrial> trials, GroupBy by,
                                                       const std::string& model) {
  const auto mine = [&](const ScoredTrial& t) { return t.model_id == model; };
  for (const auto& t : trials) {
    if (mine(t) && group_key(t, by)) return aggregate(trials, by, mine);
  }
  return {};
}

void require_models(std::span<const ModelResults> models, std::size_t at_least) {
  if (models.size() < at_least) {
    throw Error(ErrorKind::Invalid, "needs at least " + std::to_string(at_least) + " model(s), got " +
                                        std::to_string(models.size()));
  }
}

void require_strategies(const ModelResults& m) {
  for (Strategy s : kAllStrategies) {
    auto it = m.strategies.find(s);
    if (it == m.strategies.end() || it->second.n == 0) {
      throw Error(ErrorKind::Invalid, "model " + m.model_id + " has no judged trials for strategy " +
                                          std::string(to_string(s)));
    }
  }
}

const Distribution& cell(const ModelResults& m, TableRow row) {
  auto it = m.rows.find(row);
  if (it == m.rows.end() || it->second.n == 0) {
    throw Error(ErrorKind::Invalid, "missing cell: model " + m.model_id + ", row " + std::string(to_string(row)));
  }
  return it->second;
}

// CSV field quoting for model ids that contain separators.
std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string md_cell(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string_view to_string(TableRow r) noexcept {
  for (const auto& info : kRowInfo) {
    if (info.row == r) return info.key;
  }
  return "?";
}

std::string_view row_title(TableRow r) noexcept {
  for (const auto& info : kRowInfo) {
    if (info.row == r) return info.title;
  }
  return "?";
}

TableRow row_of(Mechanism m) noexcept {
  switch (m) {
    case Mechanism::Hierarchical: return TableRow::Hierarchical;
    case Mechanism::SocialContract: return TableRow::SocialContract;
    case Mechanism::Emotional: return TableRow::Emotional;
    case Mechanism::Narrative: return TableRow::Narrative;
  }
  return TableRow::Overall;
}

std::string format_pct(double x) { return format_fixed(x, 1); }
std::string format_rho(double x) { return format_fixed(x, 2); }

std::vector<ModelResults> summarize(std::span<const ScoredTrial> trials, std::span<const std::string> models) {
  std::vector<ModelResults> out;
  for (const auto& model : models) {
    ModelResults r;
    r.model_id = model;
    const auto classes = aggregate_or_empty(trials, GroupBy::ConditionClass, model);
    if (classes.empty()) throw Error(ErrorKind::Invalid, "no trials for model " + model);
    for (const auto& [key, d] : classes) {
      r.unjudged += d.unjudged;
      if (key == "no-prefix") r.rows[TableRow::NoPrefix] = d;
      if (key == "control") r.rows[TableRow::Control] = d;
      if (key == "influence") r.rows[TableRow::Overall] = d;
    }
    for (const auto& [key, d] : aggregate_or_empty(trials, GroupBy::Mechanism, model)) {
      r.rows[row_of(*parse_mechanism(key))] = d;
    }
    for (const auto& [key, d] : aggregate_or_empty(trials, GroupBy::Strategy, model)) {
      r.strategies[*parse_strategy(key)] = d;
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string emit_main_table(std::span<const ModelResults> models, std::span<const TableRow> rows) {
  require_models(models, 1);
  if (rows.empty()) throw Error(ErrorKind::Invalid, "main table needs at least one row");
  const bool average = models.size() >= 2;
  std::string out = "| Condition |";
  std::string rule = "|---|";
  for (const auto& m : models) {
    out += " " + md_cell(m.model_id) + " |";
    rule += "---|";
  }
  if (average) {
    out += " Average |";
    rule += "---|";
  }
  out += "\n" + rule + "\n";
  const auto fmt = [](double f, double b, double p, double n) {
    return format_pct(f) + " / " + format_pct(b) + "<br>" + format_pct(p) + " / " + format_pct(n);
  };
  for (TableRow row : rows) {
    out += "| " + std::string(row_title(row)) + " |";
    double sf = 0, sb = 0, sp = 0, sn = 0;
    for (const auto& m : models) {
      const auto& d = cell(m, row);
      out += " " + fmt(d.framed_pct, d.both_pct, d.prior_pct, d.neither_pct) + " |";
      sf += d.framed_pct;
      sb += d.both_pct;
      sp += d.prior_pct;
      sn += d.neither_pct;
    }
    if (average) {
      const double k = static_cast<double>(models.size());
      out += " " + fmt(sf / k, sb / k, sp / k, sn / k) + " |";
    }
    out += "\n";
  }
  out += "\nEach cell: Framed / Both, then Prior / Neither, in percent of judged trials.\n";
  out += "\nUnjudged trials (excluded):";
  for (std::size_t i = 0; i < models.size(); ++i) {
    out += (i == 0 ? " " : ", ") + md_cell(models[i].model_id) + " " + std::to_string(models[i].unjudged);
  }
  out += "\n";
  return out;
}

std::string emit_boost_table(std::span<const ModelResults> models) {
  require_models(models, 1);
  std::string out = "model,lorem_ipsum_baseline,overall_prefix,absolute_boost_pp,relative_boost_pct\n";
  std::vector<Boost> boosts;
  double sum_base = 0, sum_overall = 0, sum_abs = 0;
  for (const auto& m : models) {
    const auto& base = cell(m, TableRow::Control);
    const auto& overall = cell(m, TableRow::Overall);
    const Boost b = compute_boost(base, overall);
    boosts.push_back(b);
    sum_base += base.framed_pct;
    sum_overall += overall.framed_pct;
    sum_abs += b.absolute_pp;
    out += csv_field(m.model_id) + "," + format_pct(base.framed_pct) + "," + format_pct(overall.framed_pct) + "," +
           format_pct(b.absolute_pp) + "," + format_pct(b.relative_pct) + "\n";
  }
  const double k = static_cast<double>(models.size());
  out += "Average," + format_pct(sum_base / k) + "," + format_pct(sum_overall / k) + "," + format_pct(sum_abs / k) +
         "," + format_pct(average_relative_boost(boosts)) + "\n";
  return out;
}

std::string emit_correlation_matrix(std::span<const ModelResults> models) {
  require_models(models, 2);
  std::vector<std::vector<double>> rates;
  for (const auto& m : models) {
    require_strategies(m);
    std::vector<double> r;
    for (Strategy s : kAllStrategies) r.push_back(m.strategies.at(s).framed_pct);
    rates.push_back(std::move(r));
  }
  const std::size_t k = models.size();
  std::vector<std::vector<std::string>> cells(k, std::vector<std::string>(k, "--"));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      std::string v;
      try {
        const auto rc = spearman(rates[i], rates[j]);
        v = format_rho(rc.rho) + rc.stars;
      } catch (const Error&) {
        v = "n/a";
      }
      cells[i][j] = cells[j][i] = v;
    }
  }
  std::string out;
  for (const auto& m : models) out += "," + csv_field(m.model_id);
  out += "\n";
  for (std::size_t i = 0; i < k; ++i) {
    out += csv_field(models[i].model_id);
    for (std::size_t j = 0; j < k; ++j) out += "," + cells[i][j];
    out += "\n";
  }
  return out;
}

std::string emit_figure_data(std::span<const ModelResults> models) {
  require_models(models, 1);
  for (const auto& m : models) require_strategies(m);
  std::vector<std::pair<Strategy, double>> order;
  for (Strategy s : kAllStrategies) {
    double sum = 0;
    for (const auto& m : models) sum += m.strategies.at(s).framed_pct;
    order.emplace_back(s, sum / static_cast<double>(models.size()));
  }
  std::sort(order.begin(), order.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return to_string(x.first) < to_string(y.first);
  });
  std::string out =
      "rank,strategy,mechanism,model,framed_pct,both_pct,prior_pct,neither_pct,framed,both,prior,neither,n,"
      "average_framed_pct\n";
  int rank = 0;
  for (const auto& [s, avg] : order) {
    ++rank;
    for (const auto& m : models) {
      const auto& d = m.strategies.at(s);
      out += std::to_string(rank) + "," + std::string(to_string(s)) + "," +
             std::string(to_string(mechanism_of(s))) + "," + csv_field(m.model_id) + "," + format_pct(d.framed_pct) +
             "," + format_pct(d.both_pct) + "," + format_pct(d.prior_pct) + "," + format_pct(d.neither_pct) + "," +
             std::to_string(d.framed) + "," + std::to_string(d.both) + "," + std::to_string(d.prior) + "," +
             std::to_string(d.neither) + "," + std::to_string(d.n) + "," + format_pct(avg) + "\n";
    }
  }
  return out;
}

ReportBundle build_report(std::span<const ModelResults> models, json manifest) {
  ReportBundle bundle;
  const auto attempt = [&](std::string_view name, auto&& emit) {
    try {
      bundle.files.emplace(std::string(name), emit());
    } catch (const Error& e) {
      bundle.omitted.emplace(std::string(name), e.what());
    }
  };

  std::vector<TableRow> rows;
  for (TableRow r : kAllRows) {
    if (std::any_of(models.begin(), models.end(), [&](const ModelResults& m) { return m.rows.contains(r); })) {
      rows.push_back(r);
    }
  }
  attempt(kMainTableFile, [&] { return emit_main_table(models, rows); });
  attempt(kBoostTableFile, [&] { return emit_boost_table(models); });
  attempt(kCorrelationsFile, [&] { return emit_correlation_matrix(models); });
  attempt(kFigureFile, [&] { return emit_figure_data(models); });

  json files = json::object();
  for (const auto& [name, body] : bundle.files) files[name] = {{"sha256", sha256_hex(body)}, {"bytes", body.size()}};
  json omitted = json::object();
  for (const auto& [name, reason] : bundle.omitted) omitted[name] = reason;
  json unjudged = json::object();
  for (const auto& m : models) unjudged[m.model_id] = m.unjudged;
  manifest["schema"] = std::string(kManifestSchema);
  manifest["files"] = std::move(files);
  manifest["omitted"] = std::move(omitted);
  manifest["unjudged"] = std::move(unjudged);
  bundle.manifest = std::move(manifest);
  return bundle;
}

void write_report(const ReportBundle& bundle, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::string_view name : {kMainTableFile, kBoostTableFile, kCorrelationsFile, kFigureFile}) {
    std::error_code ec;
    if (!bundle.files.contains(std::string(name))) std::filesystem::remove(dir / name, ec);
  }
  for (const auto& [name, body] : bundle.files) jsonl::write_atomic(dir / name, body);
  jsonl::write_atomic(dir / kManifestFile, bundle.manifest.dump(2) + "\n");
}

}  // namespace framebench
