#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rmats::csv {

// Splits one comma-separated line; no quoting (identifiers and numbers only).
std::vector<std::string> split(std::string_view line, char sep = ',');

std::string_view trim(std::string_view s);

// Strips a trailing '\r' and a leading UTF-8 byte-order mark on the first line.
void normalize_line(std::string& line, bool first_line);

bool parse_double(std::string_view text, double& out);
bool parse_int(std::string_view text, long& out);
inline std::optional<double> to_double(std::string_view text) {
  double v = 0.0;
  if (!parse_double(text, v)) return std::nullopt;
  return v;
}
inline std::optional<long> to_int(std::string_view text) {
  long v = 0;
  if (!parse_int(text, v)) return std::nullopt;
  return v;
}

// Writes `content` to `path` via a sibling temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace rmats::csv
