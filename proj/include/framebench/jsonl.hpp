#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace framebench::jsonl {

using json = nlohmann::json;

struct Record {
  std::size_t line = 0;  // 1-based line number in the source file
  json value;
};

/// Reads a line-delimited JSON file whose first record is a header
/// `{"schema": <schema>, ...}`. Blank lines are skipped. Returns the header
/// and every following record; throws Error(Parse) with the line number on
/// malformed input or a schema mismatch.
struct Document {
  json header;
  std::vector<Record> records;
};
Document read(const std::filesystem::path& path, std::string_view schema);

/// Compact single-line serialization terminated by '\n'. Keys are sorted, so
/// equal values always serialize to equal bytes.
std::string line(const json& value);

/// Header line `{"schema": ..., **extra}`.
std::string header(std::string_view schema, json extra = json::object());

/// Writes `contents` to a sibling temp file and renames it into place.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace framebench::jsonl
