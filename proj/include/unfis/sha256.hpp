#pragma once

#include <string>

namespace unfis {

// Hex digest of a byte string (FIPS 180-4).
std::string sha256_hex(const std::string& bytes);

// Hex digest of a file's contents; throws an io error if unreadable.
std::string sha256_file(const std::string& path);

}  // namespace unfis
