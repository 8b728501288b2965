// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace serval {

/// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

std::uint32_t crc32(std::span<const std::byte> data);
std::uint32_t crc32(std::string_view data);

/// Standard (RFC 4648) base64 with padding, no line breaks.
std::string base64_encode(std::string_view data);

/// Whole file as bytes. Throws ParseError if unreadable.
std::string read_file_bytes(const std::filesystem::path& path);

}  // namespace serval
