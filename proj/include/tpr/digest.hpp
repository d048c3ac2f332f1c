#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

namespace tpr {

/// Lower-case hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(const std::string& text);

/// Whole file contents; IoError if unreadable.
std::string read_file(const std::filesystem::path& path);

}  // namespace tpr
