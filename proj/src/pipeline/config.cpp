#include "framebench/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "framebench/error.hpp"
#include "framebench/jsonl.hpp"

namespace framebench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const fs::path& p, const fs::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return (base / p).lexically_normal();
}

std::vector<std::string> string_list(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  if (it->is_string()) return {it->get<std::string>()};
  return it->get<std::vector<std::string>>();
}

}  // namespace

const ModelEndpoint& RunConfig::endpoint(std::string_view model_id) const {
  auto it = std::find_if(endpoints.begin(), endpoints.end(),
                         [&](const ModelEndpoint& e) { return e.model_id == model_id; });
  if (it == endpoints.end()) {
    throw Error(ErrorKind::Usage, "no endpoint configured for model \"" + std::string(model_id) + "\"");
  }
  return *it;
}

RunConfig config_from_json(const json& j, const fs::path& base_dir) {
  RunConfig c;
  try {
    if (!j.is_object()) throw Error(ErrorKind::Usage, "config must be a JSON object");
    c.corpus = resolve(j.at("corpus").get<std::string>(), base_dir);

    const auto& eps = j.at("endpoints");
    if (eps.is_string()) {
      c.endpoints = load_endpoints(resolve(eps.get<std::string>(), base_dir));
    } else {
      for (const auto& e : eps) c.endpoints.push_back(endpoint_from_json(e, base_dir));
    }

    c.judge = j.value("judge", std::string());
    c.models = string_list(j, "models");

    if (auto s = j.value("conditions", std::string("all")); auto sel = ConditionSelector::parse(s)) {
      c.plan.conditions = *sel;
    } else {
      throw Error(ErrorKind::Usage, "bad conditions selector \"" + s + "\"");
    }
    c.plan.conditions.prefix_ids = string_list(j, "prefixes");
    c.plan.conditions.control_ids = string_list(j, "controls");
    if (auto s = j.value("orders", std::string("both")); auto o = parse_order_selector(s)) {
      c.plan.orders = *o;
    } else {
      throw Error(ErrorKind::Usage, "bad orders selector \"" + s + "\"");
    }
    if (auto s = j.value("placement", std::string("second")); auto p = parse_placement(s)) {
      c.plan.placement = *p;
    } else {
      throw Error(ErrorKind::Usage, "bad placement \"" + s + "\"");
    }
    c.plan.pair_ids = string_list(j, "pairs");
    c.plan.replicates = j.value("replicates", 1);

    c.parallelism = j.value("parallelism", 4);
    c.rate_limit = j.value("rate_limit", 0.0);
    c.out = resolve(j.value("out", std::string("out")), base_dir);
    c.cache_dir = j.contains("cache_dir") ? resolve(j.at("cache_dir").get<std::string>(), base_dir) : c.out / "cache";
    c.seed = j.value("seed", std::uint64_t{0});
    c.audit_size = j.value("audit_size", std::size_t{200});
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Usage, std::string("config: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Usage) throw;
    throw Error(ErrorKind::Usage, std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw Error(ErrorKind::Usage, "config file not found: " + path.string());
  json j;
  try {
    j = json::parse(jsonl::read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Usage, path.string() + ": " + e.what());
  }
  return config_from_json(j, fs::absolute(path).parent_path());
}

void check_config(const RunConfig& c) {
  if (c.models.empty()) throw Error(ErrorKind::Usage, "config selects no models");
  std::set<std::string> seen;
  for (const auto& m : c.models) {
    if (!seen.insert(m).second) throw Error(ErrorKind::Usage, "model \"" + m + "\" listed twice");
    c.endpoint(m);
  }
  if (c.judge.empty()) throw Error(ErrorKind::Usage, "config names no judge");
  c.endpoint(c.judge);
  if (seen.contains(c.judge)) {
    throw Error(ErrorKind::Usage, "judge \"" + c.judge + "\" is also an evaluated model; the judge must be disjoint");
  }
  if (c.parallelism < 1) throw Error(ErrorKind::Usage, "parallelism must be at least 1");
  if (c.rate_limit < 0 || !std::isfinite(c.rate_limit)) throw Error(ErrorKind::Usage, "rate_limit must be >= 0");
  if (c.plan.replicates < 1) throw Error(ErrorKind::Usage, "replicates must be at least 1");
  if (c.corpus.empty()) throw Error(ErrorKind::Usage, "config names no corpus");
  if (c.out.empty()) throw Error(ErrorKind::Usage, "config names no output directory");
}

}  // namespace framebench
