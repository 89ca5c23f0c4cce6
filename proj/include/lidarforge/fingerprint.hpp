#pragma once

#include <string>
#include <string_view>

namespace lidarforge {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

/// Version string of the linked hashing library.
std::string hash_library_version();

}  // namespace lidarforge
