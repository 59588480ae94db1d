#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace lagcast::io {

/// Shortest text that parses back to exactly `v` ('.' separator, no grouping).
std::string round_trip(double v);
/// Fixed notation with six decimals, for human-facing CSV summaries.
std::string fixed6(double v);
/// 17 significant digits, as written into JSON documents.
std::string json_number(double v);

std::string read_text_file(const std::filesystem::path& path);
/// Creates parent directories as needed.
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace lagcast::io
