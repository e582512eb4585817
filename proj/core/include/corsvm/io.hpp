#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace corsvm {

/// Writes content to path atomically (temp file in the same directory,
/// then rename), so readers never observe a truncated file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);

/// Atomic write of a JSON document, 2-space indent, trailing newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

/// Shortest decimal form that round-trips, via std::to_chars.
std::string format_double(double value);

/// Fixed significant-digit form ("%.17g" style) used by the CSV writer.
std::string format_double_sig(double value, int significant_digits);

}  // namespace corsvm
