// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace plclab {

/// Shortest decimal representation that parses back to the same double.
/// Output is locale-independent so files compare byte-for-byte.
std::string format_number(double v);

/// Strict parse of a whole field; throws std::invalid_argument on trailing junk.
double parse_number(std::string_view field);
std::size_t parse_count(std::string_view field);

std::vector<std::string_view> split_fields(std::string_view line, char sep = ',');
std::string_view trim(std::string_view s);

/// Row-wise CSV reader that checks the header and reports 1-based line numbers.
class CsvReader {
 public:
  CsvReader(const std::filesystem::path& path, std::string_view expected_header);

  /// Reads the next data row; returns false at end of file. Blank lines are skipped.
  bool next(std::vector<std::string_view>& fields);
  std::size_t line_number() const noexcept { return line_no_; }
  const std::filesystem::path& path() const noexcept { return path_; }

  /// Throws std::runtime_error tagged with the file and current line.
  [[noreturn]] void fail(std::string_view message) const;

 private:
  std::filesystem::path path_;
  std::string content_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

/// Ordered key=value metadata. Lines starting with '#' are comments.
using KeyValues = std::map<std::string, std::string, std::less<>>;

KeyValues read_key_values(const std::filesystem::path& path);
void write_key_values(const std::filesystem::path& path, const KeyValues& values);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace plclab
