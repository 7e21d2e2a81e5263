#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace irbench {

/// Hex-encoded SHA-256 digest.
std::string sha256_hex(std::string_view data);
std::string sha256_hex(const std::vector<unsigned char>& data);

/// Short (96-bit) digest used for identifiers that appear in logs and filenames.
std::string short_digest(std::string_view data);

std::string base64_encode(const unsigned char* data, std::size_t len);
std::string base64_encode(const std::vector<unsigned char>& data);
std::vector<unsigned char> base64_decode(std::string_view text);

}  // namespace irbench
