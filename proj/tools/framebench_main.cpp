#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "framebench/config.hpp"
#include "framebench/corpus.hpp"
#include "framebench/error.hpp"
#include "framebench/jsonl.hpp"
#include "framebench/pipeline.hpp"
#include "framebench/text.hpp"

namespace fs = std::filesystem;
using namespace framebench;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailures = 1;
constexpr int kExitUsage = 2;

struct Overrides {
  std::string config;
  std::string models;
  std::string conditions;
  std::string orders;
  std::string placement;
  std::optional<int> parallelism;
  std::string out;
};

void add_config_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "Run configuration (JSON)")->required();
  cmd->add_option("--models", o.models, "Comma-separated model ids to evaluate");
  cmd->add_option("--conditions", o.conditions, "no-prefix|control|influence|all (comma list allowed)");
  cmd->add_option("--orders", o.orders, "both|a-first|b-first");
  cmd->add_option("--placement", o.placement, "second|first|both");
  cmd->add_option("--parallelism", o.parallelism, "Requests in flight at once");
  cmd->add_option("--out", o.out, "Output directory");
}

RunConfig resolve_config(const Overrides& o) {
  RunConfig c = load_config(o.config);
  if (!o.models.empty()) c.models = text::split(o.models, ',');
  if (!o.conditions.empty()) {
    auto sel = ConditionSelector::parse(o.conditions);
    if (!sel) throw Error(ErrorKind::Usage, "bad --conditions \"" + o.conditions + "\"");
    sel->prefix_ids = c.plan.conditions.prefix_ids;
    sel->control_ids = c.plan.conditions.control_ids;
    c.plan.conditions = *sel;
  }
  if (!o.orders.empty()) {
    auto sel = parse_order_selector(o.orders);
    if (!sel) throw Error(ErrorKind::Usage, "bad --orders \"" + o.orders + "\"");
    c.plan.orders = *sel;
  }
  if (!o.placement.empty()) {
    auto p = parse_placement(o.placement);
    if (!p) throw Error(ErrorKind::Usage, "bad --placement \"" + o.placement + "\"");
    c.plan.placement = *p;
  }
  if (o.parallelism) c.parallelism = *o.parallelism;
  if (!o.out.empty()) {
    const bool default_cache = c.cache_dir == c.out / "cache";
    c.out = o.out;
    if (default_cache) c.cache_dir = c.out / "cache";
  }
  return c;
}

int stage_exit(const std::vector<StageResult>& results) {
  for (const auto& r : results) {
    if (r.failures > 0) return kExitFailures;
  }
  return kExitOk;
}

int cmd_validate(const std::string& corpus_dir, const std::string& config_path) {
  fs::path dir = corpus_dir;
  if (dir.empty()) {
    if (config_path.empty()) throw Error(ErrorKind::Usage, "validate needs --corpus or --config");
    dir = load_config(config_path).corpus;
  }
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(ErrorKind::Usage, "corpus directory not found: " + dir.string());
  CorpusLoad load;
  try {
    load = load_corpus(dir);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Corpus && e.kind() != ErrorKind::Parse) throw;
    std::cout << "error [load] " << e.what() << "\n";
    return kExitFailures;
  }
  for (const auto& w : load.warnings) std::cout << "warning [load] " << w << "\n";
  const auto report = validate_corpus(load.corpus);
  std::cout << report.to_text();
  return report.has_errors() ? kExitFailures : kExitOk;
}

int cmd_gen_controls(const std::string& corpus_dir, int count, const std::string& out) {
  std::error_code ec;
  if (!fs::is_directory(corpus_dir, ec)) throw Error(ErrorKind::Usage, "corpus directory not found: " + corpus_dir);
  const auto load = load_corpus(corpus_dir);
  const auto stats = corpus_stats(load.corpus.prefixes);
  const auto controls = generate_controls(stats, count);
  const auto body = serialize_controls(controls);
  if (out.empty()) {
    std::cout << body;
  } else {
    jsonl::write_atomic(out, body);
    std::cerr << "wrote " << controls.size() << " controls (min " << stats.min << ", median " << stats.median
              << ", max " << stats.max << ") to " << out << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"framebench: measures how pragmatic framing shifts directive prioritization in chat models"};
  app.require_subcommand(1);

  std::string corpus_dir;
  std::string validate_config;
  auto* validate = app.add_subcommand("validate", "Check the corpus and print a validation report");
  validate->add_option("--corpus", corpus_dir, "Corpus directory");
  validate->add_option("--config", validate_config, "Run configuration naming the corpus");

  Overrides o;
  std::vector<std::pair<std::string, CLI::App*>> stages;
  for (const char* name : {"plan", "run", "judge", "analyze", "report", "all"}) {
    auto* cmd = app.add_subcommand(name, std::string("Pipeline stage: ") + name);
    add_config_options(cmd, o);
    stages.emplace_back(name, cmd);
  }
  stages.front().second->description("Write the trial matrix to <out>/plan.jsonl");
  stages[1].second->description("Query the evaluated models for every planned trial (cached)");
  stages[2].second->description("Classify responses with the judge model");
  stages[3].second->description("Aggregate judgments into metrics records");
  stages[4].second->description("Write tables, figure data and the manifest");
  stages[5].second->description("Run every stage in order");

  std::optional<std::size_t> audit_size;
  auto* audit_export = app.add_subcommand("audit-export", "Sample judged responses for human annotation");
  add_config_options(audit_export, o);
  audit_export->add_option("--size", audit_size, "Rows to sample (default: audit_size from the config)");

  std::string annotated;
  auto* audit_score = app.add_subcommand("audit-score", "Agreement between human labels and judge labels");
  add_config_options(audit_score, o);
  audit_score->add_option("labels", annotated, "Annotated audit file")->required();

  std::string gen_corpus;
  int gen_count = 10;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-controls", "Generate length-matched lorem ipsum controls");
  gen->add_option("--corpus", gen_corpus, "Corpus directory whose prefixes set the lengths")->required();
  gen->add_option("--count", gen_count, "Number of controls")->check(CLI::Range(3, 1000));
  gen->add_option("--out", gen_out, "Write controls.jsonl here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*validate) return cmd_validate(corpus_dir, validate_config);
    if (*gen) return cmd_gen_controls(gen_corpus, gen_count, gen_out);

    Pipeline pipeline(resolve_config(o), make_backend, &std::cerr);
    if (*audit_export) {
      std::cout << pipeline.audit_export(audit_size).string() << "\n";
      return kExitOk;
    }
    if (*audit_score) {
      std::cout << pipeline.audit_score(annotated) << "\n";
      return kExitOk;
    }
    for (const auto& [name, cmd] : stages) {
      if (!*cmd) continue;
      std::vector<StageResult> results;
      if (name == "plan") results.push_back(pipeline.plan());
      else if (name == "run") results.push_back(pipeline.run());
      else if (name == "judge") results.push_back(pipeline.judge());
      else if (name == "analyze") results.push_back(pipeline.analyze());
      else if (name == "report") results.push_back(pipeline.report());
      else results = pipeline.all();
      return stage_exit(results);
    }
  } catch (const Error& e) {
    std::cerr << "framebench: " << e.what() << "\n";
    return e.kind() == ErrorKind::Usage ? kExitUsage : kExitFailures;
  } catch (const std::exception& e) {
    std::cerr << "framebench: " << e.what() << "\n";
    return kExitFailures;
  }
  return kExitUsage;
}
