#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mad {

// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents);

std::string read_file(const std::filesystem::path& path);

std::vector<std::string> split_csv_line(std::string_view line);

// Shortest round-trip decimal representation.
std::string format_double(double v);

// 64-bit FNV-1a, used for config digests.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace mad
