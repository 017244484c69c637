#pragma once

// Small text helpers shared by the file formats.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace polyforge {

/// 16 lowercase hex digits.
std::string hex64(std::uint64_t v);
/// Round-trippable decimal (%.17g).
std::string format_double(double v);
/// Unquoted CSV: splits on commas, trims trailing CR and spaces, keeps
/// empty cells (including a trailing one).
std::vector<std::string> split_csv(const std::string& line);
/// Whole file as bytes; throws Error(kIoError).
std::string read_file(const std::filesystem::path& path);
/// Writes bytes, replacing the file; throws Error(kIoError).
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace polyforge
