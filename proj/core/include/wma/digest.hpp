#pragma once

#include <string>
#include <string_view>

namespace wma {

/// Lower-case hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// First 16 hex characters of sha256_hex; used for record keys and logs.
std::string short_digest(std::string_view data);

/// Digest of an observation: whitespace-collapsed tree text.
std::string observation_digest(std::string_view tree_text);

}  // namespace wma
