#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <thread>

#include "framebench/error.hpp"
#include "framebench/jsonl.hpp"
#include "framebench/runtime.hpp"

namespace framebench {

namespace fs = std::filesystem;
using nlohmann::json;

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
}

fs::path ResponseCache::entry_path(std::string_view key) const {
  if (key.size() < 3 || key.find_first_of("/\\.") != std::string_view::npos) {
    throw Error(ErrorKind::Invalid, "bad cache key \"" + std::string(key) + "\"");
  }
  return dir_ / std::string(key.substr(0, 2)) / (std::string(key) + ".json");
}

namespace {

enum class EntryState { Missing, Valid, Corrupt };

struct ReadResult {
  EntryState state = EntryState::Missing;
  RawResponse value;
  std::string problem;
};

ReadResult read_entry(const fs::path& path, std::string_view key) {
  ReadResult r;
  std::error_code ec;
  if (!fs::exists(path, ec)) return r;
  try {
    r.value = raw_response_from_json(json::parse(jsonl::read_file(path)));
    if (r.value.trial_key != key) {
      r.state = EntryState::Corrupt;
      r.problem = "stored key " + r.value.trial_key + " does not match file name";
    } else if (!r.value.ok()) {
      r.state = EntryState::Corrupt;
      r.problem = "stored response is not a success";
    } else {
      r.state = EntryState::Valid;
    }
  } catch (const std::exception& e) {
    r.state = EntryState::Corrupt;
    r.problem = e.what();
  }
  return r;
}

}  // namespace

std::optional<RawResponse> ResponseCache::lookup(std::string_view key) const {
  const auto path = entry_path(key);
  auto r = read_entry(path, key);
  if (r.state == EntryState::Corrupt) {
    std::lock_guard lock(mu_);
    corrupt_.push_back(path.string() + ": " + r.problem);
    return std::nullopt;
  }
  if (r.state == EntryState::Missing) return std::nullopt;
  return std::move(r.value);
}

bool ResponseCache::contains(std::string_view key) const {
  return read_entry(entry_path(key), key).state == EntryState::Valid;
}

std::vector<std::string> ResponseCache::corruption_reports() const {
  std::lock_guard lock(mu_);
  return corrupt_;
}

void ResponseCache::store(const RawResponse& response) {
  if (!response.ok()) throw Error(ErrorKind::Invalid, "only successful responses are cached");
  const auto path = entry_path(response.trial_key);
  fs::create_directories(path.parent_path());
  const std::string body = jsonl::line(to_json(response));

  for (int attempt = 0; attempt < 2; ++attempt) {
    // Write a private temp file, then link() it into place: link fails with
    // EEXIST instead of replacing, which keeps the store append-only.
    const auto tmp = path.parent_path() /
                     (std::string(".") + response.trial_key + "." + std::to_string(::getpid()) + "." +
                      std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << body;
      if (!out.flush()) throw Error(ErrorKind::Invalid, "cannot write " + tmp.string());
    }
    const int rc = ::link(tmp.c_str(), path.c_str());
    const int err = errno;
    std::error_code ec;
    fs::remove(tmp, ec);
    if (rc == 0) return;
    if (err != EEXIST) {
      throw Error(ErrorKind::Invalid, "cannot store " + path.string() + ": " + std::strerror(err));
    }
    auto existing = read_entry(path, response.trial_key);
    if (existing.state == EntryState::Valid) {
      if (existing.value == response) return;
      throw Error(ErrorKind::Conflict, "cache entry " + response.trial_key + " already holds a different response");
    }
    if (existing.state == EntryState::Corrupt) {
      {
        std::lock_guard lock(mu_);
        corrupt_.push_back(path.string() + ": " + existing.problem);
      }
      fs::rename(path, path.string() + ".corrupt", ec);
      if (ec) fs::remove(path, ec);
    }
  }
  throw Error(ErrorKind::Conflict, "cache entry " + response.trial_key + " could not be stored");
}

}  // namespace framebench
