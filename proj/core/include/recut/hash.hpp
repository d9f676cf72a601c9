#pragma once

#include <string>
#include <string_view>

namespace recut {

// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view data);

// SHA-256 of a file's contents; throws recut::Error if unreadable.
std::string sha256_file(const std::string& path);

}  // namespace recut
