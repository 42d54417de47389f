#pragma once

#include <string>
#include <string_view>

namespace framebench {

/// Lowercase hexadecimal SHA-256 digest of `data`.
std::string sha256_hex(std::string_view data);

/// Deterministic uniform draw in [0, 1) derived from the digest of `data`.
double unit_interval_hash(std::string_view data);

}  // namespace framebench
