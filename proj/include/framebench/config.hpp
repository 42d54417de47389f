#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "framebench/composer.hpp"
#include "framebench/runtime.hpp"

namespace framebench {

/// Everything one experiment needs. Loaded from a JSON file; relative paths
/// resolve against that file's directory.
struct RunConfig {
  std::filesystem::path corpus;
  std::vector<ModelEndpoint> endpoints;
  std::string judge;                // model_id of the judge endpoint
  std::vector<std::string> models;  // evaluated model ids
  PlanOptions plan;
  int parallelism = 4;
  double rate_limit = 0.0;
  std::filesystem::path cache_dir;  // defaults to <out>/cache
  std::filesystem::path out;
  std::uint64_t seed = 0;
  std::size_t audit_size = 200;

  const ModelEndpoint& endpoint(std::string_view model_id) const;
};

/// Config keys: corpus, endpoints (file path or inline array), judge, models,
/// conditions, orders, placement, pairs, prefixes, controls, replicates,
/// parallelism, rate_limit, cache_dir, out, seed, audit_size.
RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

/// Rejects configs that could not run: unknown models, a judge that is also
/// evaluated, missing endpoints, bad limits. Throws Error(Usage). Needs no
/// network access.
void check_config(const RunConfig& config);

}  // namespace framebench
