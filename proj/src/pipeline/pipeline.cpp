#include "framebench/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <unordered_map>

#include "framebench/error.hpp"
#include "framebench/hash.hpp"
#include "framebench/jsonl.hpp"

namespace framebench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr GroupBy kRecordedGroupings[] = {GroupBy::Model,    GroupBy::ConditionClass, GroupBy::Mechanism,
                                          GroupBy::Strategy, GroupBy::Prefix,         GroupBy::Pair};

void require_file(const fs::path& p, std::string_view producer) {
  std::error_code ec;
  if (!fs::is_regular_file(p, ec)) {
    throw Error(ErrorKind::Dependency,
                "missing " + p.filename().string() + " (" + p.string() + "); run `" + std::string(producer) + "` first");
  }
}

// Endpoint description for the manifest: no secrets, no machine paths.
json manifest_endpoint(const ModelEndpoint& e) {
  json j = to_json(e);
  if (!e.script.empty()) {
    j.erase("script");
    j["script_sha256"] = sha256_hex(jsonl::read_file(e.script));
  }
  return j;
}

}  // namespace

std::vector<PlannedTrial> read_plan(const fs::path& path, std::string* corpus_digest) {
  const auto doc = jsonl::read(path, kPlanSchema);
  if (corpus_digest) *corpus_digest = doc.header.value("corpus_digest", std::string());
  std::vector<PlannedTrial> out;
  out.reserve(doc.records.size());
  for (const auto& rec : doc.records) {
    try {
      out.push_back({trial_spec_from_json(rec.value), rec.value.at("trial_key").get<std::string>()});
    } catch (const std::exception& e) {
      throw Error(ErrorKind::Parse, path.filename().string() + ":" + std::to_string(rec.line) + ": " + e.what());
    }
  }
  return out;
}

std::vector<RawResponse> read_responses(const fs::path& path) {
  const auto doc = jsonl::read(path, kResponsesSchema);
  std::vector<RawResponse> out;
  out.reserve(doc.records.size());
  for (const auto& rec : doc.records) {
    try {
      out.push_back(raw_response_from_json(rec.value));
    } catch (const std::exception& e) {
      throw Error(ErrorKind::Parse, path.filename().string() + ":" + std::to_string(rec.line) + ": " + e.what());
    }
  }
  return out;
}

std::vector<Judgment> read_judgments(const fs::path& path) {
  const auto doc = jsonl::read(path, kJudgmentSchema);
  std::vector<Judgment> out;
  out.reserve(doc.records.size());
  for (const auto& rec : doc.records) {
    try {
      out.push_back(judgment_from_json(rec.value));
    } catch (const std::exception& e) {
      throw Error(ErrorKind::Parse, path.filename().string() + ":" + std::to_string(rec.line) + ": " + e.what());
    }
  }
  return out;
}

std::vector<ScoredTrial> score_trials(std::span<const PlannedTrial> plan, std::span<const Judgment> judgments,
                                      const Corpus& corpus) {
  std::unordered_map<std::string, const Judgment*> by_key;
  for (const auto& j : judgments) by_key.emplace(j.trial_key, &j);
  std::vector<ScoredTrial> out;
  out.reserve(plan.size());
  for (const auto& p : plan) {
    ScoredTrial t;
    t.model_id = p.spec.model_id;
    t.pair_id = p.spec.pair_id;
    t.condition = p.spec.condition;
    t.order = p.spec.order;
    if (t.condition.kind == ConditionKind::Influence) {
      const auto* prefix = corpus.find_prefix(t.condition.id);
      if (!prefix) throw Error(ErrorKind::Dependency, "plan references unknown prefix " + t.condition.id);
      t.strategy = prefix->strategy;
    }
    if (auto it = by_key.find(p.trial_key); it != by_key.end() && it->second->judged()) {
      t.outcome = it->second->outcome;
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<ModelResults> results_from_metrics(const fs::path& path, std::span<const std::string> models) {
  const auto doc = jsonl::read(path, kMetricsSchema);
  std::map<std::string, ModelResults> found;
  for (const auto& rec : doc.records) {
    const auto& v = rec.value;
    if (v.value("kind", std::string()) != "distribution") continue;
    try {
      const auto model = v.at("model").get<std::string>();
      const auto by = parse_group_by(v.at("group_by").get<std::string>());
      const auto key = v.at("key").get<std::string>();
      const auto d = distribution_from_json(v.at("distribution"));
      auto& r = found[model];
      r.model_id = model;
      if (by == GroupBy::ConditionClass) {
        r.unjudged += d.unjudged;
        if (key == "no-prefix") r.rows[TableRow::NoPrefix] = d;
        if (key == "control") r.rows[TableRow::Control] = d;
        if (key == "influence") r.rows[TableRow::Overall] = d;
      } else if (by == GroupBy::Mechanism) {
        auto m = parse_mechanism(key);
        if (!m) throw Error(ErrorKind::Parse, "unknown mechanism " + key);
        r.rows[row_of(*m)] = d;
      } else if (by == GroupBy::Strategy) {
        auto s = parse_strategy(key);
        if (!s) throw Error(ErrorKind::Parse, "unknown strategy " + key);
        r.strategies[*s] = d;
      }
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Parse, path.filename().string() + ":" + std::to_string(rec.line) + ": " + e.what());
    }
  }
  std::vector<ModelResults> out;
  for (const auto& m : models) {
    if (auto it = found.find(m); it != found.end()) out.push_back(std::move(it->second));
  }
  return out;
}

Pipeline::Pipeline(RunConfig config, BackendFactory factory, std::ostream* log)
    : config_(std::move(config)), factory_(std::move(factory)), log_(log) {
  check_config(config_);
  if (!factory_) factory_ = make_backend;
}

void Pipeline::say(const std::string& line) {
  if (log_) *log_ << line << "\n";
}

const Corpus& Pipeline::corpus() {
  if (!corpus_) {
    auto load = load_corpus(config_.corpus);
    for (const auto& w : load.warnings) say("corpus warning: " + w);
    corpus_ = std::move(load.corpus);
  }
  return *corpus_;
}

std::shared_ptr<ChatBackend> Pipeline::backend_for(const ModelEndpoint& endpoint) {
  auto& slot = backends_[endpoint.model_id];
  if (!slot) slot = factory_(endpoint);
  return slot;
}

BatchOptions Pipeline::batch_options(ResponseCache& cache, RunLog& log) const {
  BatchOptions o;
  o.parallelism = config_.parallelism;
  o.rate_limit = config_.rate_limit;
  o.cache = &cache;
  o.context.log = &log;
  return o;
}

StageResult Pipeline::plan() {
  const auto& c = corpus();
  const auto specs = plan_trials(c, config_.models, config_.plan);
  const auto digest = corpus_digest(c);
  std::string body = jsonl::header(kPlanSchema, {{"prompt_format", std::string(kPromptFormat)},
                                                 {"corpus_digest", digest},
                                                 {"count", specs.size()}});
  for (const auto& s : specs) {
    json j = to_json(s);
    j["trial_key"] = trial_key(s, c);
    body += jsonl::line(j);
  }
  fs::create_directories(config_.out);
  jsonl::write_atomic(path(kPlanFile), body);
  StageResult r;
  r.items = specs.size();
  r.summary = "planned " + std::to_string(specs.size()) + " trials";
  say(r.summary);
  return r;
}

StageResult Pipeline::run() {
  require_file(path(kPlanFile), "plan");
  std::string digest;
  const auto planned = read_plan(path(kPlanFile), &digest);
  const auto& c = corpus();
  if (digest != corpus_digest(c)) {
    throw Error(ErrorKind::Dependency, "plan.jsonl was built from a different corpus; run `plan` again");
  }

  std::vector<std::string> models;
  for (const auto& p : planned) {
    if (std::find(models.begin(), models.end(), p.spec.model_id) == models.end()) models.push_back(p.spec.model_id);
  }
  for (const auto& m : models) require_replication_decoding(config_.endpoint(m));

  ResponseCache cache(config_.cache_dir);
  std::ofstream log_file(path(kRunLogFile), std::ios::app);
  RunLog log(&log_file);
  std::vector<RawResponse> responses(planned.size());
  StageResult r;
  r.items = planned.size();
  for (const auto& m : models) {
    const auto& endpoint = config_.endpoint(m);
    std::vector<std::size_t> idx;
    std::vector<RequestJob> jobs;
    for (std::size_t i = 0; i < planned.size(); ++i) {
      if (planned[i].spec.model_id != m) continue;
      auto prompt = compose_prompt(planned[i].spec, c);
      const auto key = trial_key(planned[i].spec, prompt);
      if (key != planned[i].trial_key) {
        throw Error(ErrorKind::Dependency, "plan.jsonl key mismatch for " + planned[i].trial_key + "; run `plan` again");
      }
      idx.push_back(i);
      jobs.push_back({key, std::move(prompt.text)});
    }
    BatchStats stats;
    auto out = execute_batch(jobs, endpoint, *backend_for(endpoint), batch_options(cache, log), &stats);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (!out[k].ok()) {
        say("trial " + out[k].trial_key + " (" + planned[idx[k]].spec.pair_id + ", " +
            planned[idx[k]].spec.condition.label() + ", " + std::string(to_string(planned[idx[k]].spec.order)) +
            ") failed: " + std::string(to_string(out[k].status)) + ": " + out[k].error_detail);
      }
      responses[idx[k]] = std::move(out[k]);
    }
    r.cache_hits += stats.cache_hits;
    r.requests += stats.executed;
    r.failures += stats.failures;
  }
  for (const auto& report : cache.corruption_reports()) say("cache: corrupt entry " + report);

  std::string body = jsonl::header(kResponsesSchema, {{"count", responses.size()}});
  for (const auto& resp : responses) body += jsonl::line(to_json(resp));
  jsonl::write_atomic(path(kResponsesFile), body);
  r.summary = "responses: " + std::to_string(r.items) + " trials, " + std::to_string(r.cache_hits) +
              " cached, " + std::to_string(r.requests) + " requested, " + std::to_string(r.failures) + " failed";
  say(r.summary);
  return r;
}

StageResult Pipeline::judge() {
  require_file(path(kPlanFile), "plan");
  require_file(path(kResponsesFile), "run");
  const auto planned = read_plan(path(kPlanFile));
  const auto responses = read_responses(path(kResponsesFile));
  std::unordered_map<std::string, const RawResponse*> by_key;
  for (const auto& resp : responses) by_key.emplace(resp.trial_key, &resp);
  const auto& c = corpus();

  StageResult r;
  r.items = planned.size();
  std::vector<JudgeItem> items;
  for (const auto& p : planned) {
    auto it = by_key.find(p.trial_key);
    if (it == by_key.end()) {
      throw Error(ErrorKind::Dependency, "responses.jsonl has no entry for trial " + p.trial_key + "; run `run` again");
    }
    if (!it->second->ok()) {
      ++r.failures;
      continue;
    }
    const auto* pair = c.find_pair(p.spec.pair_id);
    if (!pair) throw Error(ErrorKind::Dependency, "plan references unknown pair " + p.spec.pair_id);
    items.push_back({p.trial_key, p.spec.order, pair, it->second->response_text});
  }

  const auto& judge_endpoint = config_.endpoint(config_.judge);
  ResponseCache cache(config_.cache_dir);
  std::ofstream log_file(path(kRunLogFile), std::ios::app);
  RunLog log(&log_file);
  JudgeStats stats;
  const auto judgments =
      judge_batch(items, judge_endpoint, *backend_for(judge_endpoint), batch_options(cache, log), &stats);
  for (const auto& j : judgments) {
    if (!j.judged()) say("trial " + j.trial_key + " unjudged: " + j.error_detail);
  }

  std::string body = jsonl::header(kJudgmentSchema, {{"judge_model_id", judge_endpoint.model_id},
                                                     {"count", judgments.size()}});
  for (const auto& j : judgments) body += jsonl::line(to_json(j));
  jsonl::write_atomic(path(kJudgmentsFile), body);

  r.failures += stats.unparseable + stats.transport_failures;
  r.cache_hits = stats.calls.cache_hits;
  r.requests = stats.calls.executed;
  r.summary = "judgments: " + std::to_string(stats.judged) + " judged, " + std::to_string(stats.rejudged) +
              " re-judged, " + std::to_string(stats.unparseable + stats.transport_failures) + " unjudged, " +
              std::to_string(items.size() < planned.size() ? planned.size() - items.size() : 0) +
              " without a response";
  say(r.summary);
  return r;
}

StageResult Pipeline::analyze() {
  require_file(path(kPlanFile), "plan");
  require_file(path(kJudgmentsFile), "judge");
  const auto planned = read_plan(path(kPlanFile));
  const auto judgments = read_judgments(path(kJudgmentsFile));
  const auto trials = score_trials(planned, judgments, corpus());

  std::vector<std::string> models;
  for (const auto& m : config_.models) {
    if (std::any_of(trials.begin(), trials.end(), [&](const ScoredTrial& t) { return t.model_id == m; })) {
      models.push_back(m);
    }
  }

  std::vector<json> records;
  std::map<std::string, std::vector<double>> strategy_rates;
  std::vector<Boost> boosts;
  for (const auto& m : models) {
    const auto mine = [&](const ScoredTrial& t) { return t.model_id == m; };
    std::map<std::string, std::map<std::string, Distribution>> groups;
    for (GroupBy by : kRecordedGroupings) {
      if (std::none_of(trials.begin(), trials.end(), [&](const ScoredTrial& t) { return mine(t) && group_key(t, by); })) {
        continue;
      }
      auto& g = groups[std::string(to_string(by))] = aggregate(trials, by, mine);
      for (const auto& [key, d] : g) {
        records.push_back({{"kind", "distribution"},
                           {"model", m},
                           {"group_by", std::string(to_string(by))},
                           {"key", key},
                           {"distribution", to_json(d)}});
      }
    }

    const auto& classes = groups["condition-class"];
    if (classes.contains("control") && classes.contains("influence")) {
      try {
        const auto b = compute_boost(classes.at("control"), classes.at("influence"));
        boosts.push_back(b);
        records.push_back({{"kind", "boost"}, {"model", m}, {"absolute_pp", b.absolute_pp}, {"relative_pct", b.relative_pct}});
      } catch (const Error& e) {
        records.push_back({{"kind", "boost"}, {"model", m}, {"error", e.what()}});
      }
    }

    if (groups.contains("strategy")) {
      std::map<Strategy, Distribution> per;
      for (const auto& [key, d] : groups["strategy"]) {
        if (d.n > 0) per[*parse_strategy(key)] = d;
      }
      try {
        json order = json::array();
        std::vector<double> rates;
        for (const auto& [s, rate] : strategy_ranking(per)) order.push_back({{"strategy", std::string(to_string(s))}, {"framed_pct", rate}});
        for (Strategy s : kAllStrategies) rates.push_back(per.at(s).framed_pct);
        strategy_rates[m] = std::move(rates);
        records.push_back({{"kind", "ranking"}, {"model", m}, {"order", std::move(order)}});
      } catch (const Error& e) {
        records.push_back({{"kind", "ranking"}, {"model", m}, {"error", e.what()}});
      }
    }

    if (groups.contains("prefix")) {
      std::vector<ScoredTrial> own;
      std::copy_if(trials.begin(), trials.end(), std::back_inserter(own), mine);
      std::vector<double> rates;
      for (const auto& [prefix, rate] : per_prefix_framed_rates(own)) rates.push_back(rate);
      json v = {{"kind", "variance"}, {"model", m}, {"placement", std::string(to_string(config_.plan.placement))},
                {"prefixes", rates.size()}};
      try {
        v["per_prefix"] = compliance_variance(rates);
        v["per_instance"] = instance_variance(own);
      } catch (const Error& e) {
        v["error"] = e.what();
      }
      records.push_back(std::move(v));
    }
  }

  if (!boosts.empty()) {
    records.push_back({{"kind", "average_relative_boost"}, {"value", average_relative_boost(boosts)}, {"models", boosts.size()}});
  }
  for (auto a = strategy_rates.begin(); a != strategy_rates.end(); ++a) {
    for (auto b = std::next(a); b != strategy_rates.end(); ++b) {
      json rec = {{"kind", "spearman"}, {"a", a->first}, {"b", b->first}};
      try {
        const auto rc = spearman(a->second, b->second);
        rec.update({{"rho", rc.rho}, {"p_value", rc.p_value}, {"n", rc.n}, {"stars", rc.stars},
                    {"method", rc.exact ? "exact" : "t"}});
      } catch (const Error& e) {
        rec["error"] = e.what();
      }
      records.push_back(std::move(rec));
    }
  }

  std::string body = jsonl::header(kMetricsSchema, {{"models", models}, {"count", records.size()}});
  for (const auto& rec : records) body += jsonl::line(rec);
  jsonl::write_atomic(path(kMetricsFile), body);

  StageResult r;
  r.items = records.size();
  r.failures = static_cast<std::size_t>(
      std::count_if(trials.begin(), trials.end(), [](const ScoredTrial& t) { return !t.outcome; }));
  r.summary = "metrics: " + std::to_string(records.size()) + " records over " + std::to_string(trials.size()) +
              " trials (" + std::to_string(r.failures) + " unjudged)";
  say(r.summary);
  return r;
}

StageResult Pipeline::report() {
  require_file(path(kPlanFile), "plan");
  require_file(path(kMetricsFile), "analyze");
  std::string digest;
  const auto planned = read_plan(path(kPlanFile), &digest);
  const auto results = results_from_metrics(path(kMetricsFile), config_.models);

  json manifest;
  manifest["prompt_format"] = std::string(kPromptFormat);
  manifest["corpus_digest"] = digest;
  manifest["judge_model_id"] = config_.judge;
  json models = json::array();
  for (const auto& m : results) models.push_back(m.model_id);
  manifest["models"] = std::move(models);
  json endpoints = json::array();
  for (const auto& m : config_.models) endpoints.push_back(manifest_endpoint(config_.endpoint(m)));
  endpoints.push_back(manifest_endpoint(config_.endpoint(config_.judge)));
  manifest["endpoints"] = std::move(endpoints);
  manifest["plan"] = {{"trials", planned.size()},
                      {"placement", std::string(to_string(config_.plan.placement))},
                      {"replicates", config_.plan.replicates}};

  json timestamps = json::object();
  std::error_code ec;
  if (fs::is_regular_file(path(kResponsesFile), ec)) {
    std::string first, last;
    for (const auto& resp : read_responses(path(kResponsesFile))) {
      if (resp.fetched_at.empty()) continue;
      if (first.empty() || resp.fetched_at < first) first = resp.fetched_at;
      if (last.empty() || resp.fetched_at > last) last = resp.fetched_at;
    }
    if (!first.empty()) timestamps = {{"first_response", first}, {"last_response", last}};
  }
  manifest["timestamps"] = std::move(timestamps);

  const auto bundle = build_report(results, std::move(manifest));
  write_report(bundle, path(kReportDir));
  for (const auto& [file, reason] : bundle.omitted) say("report: omitted " + file + ": " + reason);

  StageResult r;
  r.items = bundle.files.size();
  r.summary = "report: " + std::to_string(bundle.files.size()) + " files written, " +
              std::to_string(bundle.omitted.size()) + " omitted";
  say(r.summary);
  return r;
}

std::vector<StageResult> Pipeline::all() {
  std::vector<StageResult> out;
  out.push_back(plan());
  out.push_back(run());
  out.push_back(judge());
  out.push_back(analyze());
  out.push_back(report());
  return out;
}

fs::path Pipeline::audit_export(std::optional<std::size_t> n) {
  require_file(path(kResponsesFile), "run");
  require_file(path(kJudgmentsFile), "judge");
  require_file(path(kPlanFile), "plan");
  const auto planned = read_plan(path(kPlanFile));
  const auto responses = read_responses(path(kResponsesFile));
  const auto judgments = read_judgments(path(kJudgmentsFile));
  std::unordered_map<std::string, const RawResponse*> resp_by_key;
  for (const auto& r : responses) resp_by_key.emplace(r.trial_key, &r);
  std::unordered_map<std::string, const PlannedTrial*> plan_by_key;
  for (const auto& p : planned) plan_by_key.emplace(p.trial_key, &p);
  const auto& c = corpus();

  std::vector<AuditRow> population;
  for (const auto& j : judgments) {
    if (!j.judged()) continue;
    auto r = resp_by_key.find(j.trial_key);
    auto p = plan_by_key.find(j.trial_key);
    if (r == resp_by_key.end() || p == plan_by_key.end()) {
      throw Error(ErrorKind::Dependency, "judgment " + j.trial_key + " has no matching plan entry or response");
    }
    const auto* pair = c.find_pair(p->second->spec.pair_id);
    if (!pair) throw Error(ErrorKind::Dependency, "plan references unknown pair " + p->second->spec.pair_id);
    population.push_back({j.trial_key, pair->id, pair->judge_rubric, r->second->response_text});
  }
  const auto rows = audit_sample(population, n.value_or(config_.audit_size), config_.seed);
  jsonl::write_atomic(path(kAuditFile), serialize_audit(rows, config_.seed));
  say("audit: exported " + std::to_string(rows.size()) + " of " + std::to_string(population.size()) +
      " judged trials");
  return path(kAuditFile);
}

double Pipeline::audit_score(const fs::path& annotated) {
  require_file(path(kJudgmentsFile), "judge");
  const auto human = read_audit_labels(annotated);
  std::map<std::string, JudgeLabel> judge;
  for (const auto& j : read_judgments(path(kJudgmentsFile))) {
    if (j.judged() && human.contains(j.trial_key)) judge.emplace(j.trial_key, *j.label);
  }
  const double rate = audit_consistency(human, judge);
  say("audit: agreement " + std::to_string(rate) + " over " + std::to_string(human.size()) + " rows");
  return rate;
}

}  // namespace framebench
