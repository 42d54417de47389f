#include "framebench/jsonl.hpp"

#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "framebench/error.hpp"

namespace framebench::jsonl {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Parse, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Document read(const std::filesystem::path& path, std::string_view schema) {
  const std::string contents = read_file(path);
  Document doc;
  bool have_header = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    std::size_t end = contents.find('\n', pos);
    if (end == std::string::npos) end = contents.size();
    std::string_view raw(contents.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    if (raw.find_first_not_of(" \t") == std::string_view::npos) continue;

    json value;
    try {
      value = json::parse(raw);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::Parse, path.string() + ":" + std::to_string(line_no) +
                                        ": malformed record: " + e.what());
    }
    if (!value.is_object()) {
      throw Error(ErrorKind::Parse, path.string() + ":" + std::to_string(line_no) +
                                        ": record is not an object");
    }
    if (!have_header) {
      auto it = value.find("schema");
      if (it == value.end() || !it->is_string() || it->get<std::string>() != schema) {
        throw Error(ErrorKind::Parse, path.string() + ":" + std::to_string(line_no) +
                                          ": expected header with schema \"" +
                                          std::string(schema) + "\"");
      }
      doc.header = std::move(value);
      have_header = true;
      continue;
    }
    doc.records.push_back({line_no, std::move(value)});
  }
  if (!have_header) {
    throw Error(ErrorKind::Parse, path.string() + ": missing \"" + std::string(schema) +
                                      "\" header");
  }
  return doc;
}

std::string line(const json& value) {
  return value.dump(-1, ' ', false, json::error_handler_t::strict) + "\n";
}

std::string header(std::string_view schema, json extra) {
  extra["schema"] = std::string(schema);
  return line(extra);
}

void write_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Parse, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorKind::Parse, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace framebench::jsonl
