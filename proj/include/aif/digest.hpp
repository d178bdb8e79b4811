#pragma once

#include <string>
#include <string_view>

namespace aif {

/// SHA-256 of `data` as a 64-char lowercase hex string.
std::string sha256_hex(std::string_view data);

/// SHA-256 of a file's bytes; throws ValidationError if unreadable.
std::string sha256_file(const std::string& path);

}  // namespace aif
