#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rfb::csv {

/// A parsed comma-separated file with a mandatory header row.
struct Table {
  std::filesystem::path source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based line of each row in the source

  /// Position of `name` in the header, if present.
  std::optional<std::size_t> column(std::string_view name) const;
};

/// Throws std::runtime_error naming the path when the file is missing or has no header.
Table read_file(const std::filesystem::path& path);
Table parse(std::string_view text, std::filesystem::path source = {});

/// Splits one line; double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_line(std::string_view line);

/// Locale-independent strict parsers; nullopt on trailing garbage or empty input.
std::optional<double> parse_double(std::string_view field);
std::optional<long long> parse_int(std::string_view field);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

}  // namespace rfb::csv
