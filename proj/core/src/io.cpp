// SPDX-License-Identifier: Apache-2.0
#include "plclab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace plclab {

std::string format_number(double v) {
  if (v == 0.0) return "0";  // folds -0
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("format_number: conversion failed");
  return std::string(buf, end);
}

double parse_number(std::string_view field) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || end != field.data() + field.size() || field.empty()) {
    throw std::invalid_argument("not a number: '" + std::string(field) + "'");
  }
  return v;
}

std::size_t parse_count(std::string_view field) {
  field = trim(field);
  std::size_t v = 0;
  auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || end != field.data() + field.size() || field.empty()) {
    throw std::invalid_argument("not a non-negative integer: '" + std::string(field) + "'");
  }
  return v;
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

CsvReader::CsvReader(const std::filesystem::path& path, std::string_view expected_header)
    : path_(path), content_(read_file(path)) {
  std::vector<std::string_view> header;
  if (!next(header)) fail("empty file, expected header '" + std::string(expected_header) + "'");
  const auto want = split_fields(expected_header);
  if (header != want) fail("bad header, expected '" + std::string(expected_header) + "'");
}

bool CsvReader::next(std::vector<std::string_view>& fields) {
  const std::string_view all(content_);
  while (pos_ < all.size()) {
    auto end = all.find('\n', pos_);
    if (end == std::string_view::npos) end = all.size();
    const auto line = trim(all.substr(pos_, end - pos_));
    pos_ = end + 1;
    ++line_no_;
    if (line.empty() || line.front() == '#') continue;
    fields = split_fields(line);
    return true;
  }
  return false;
}

void CsvReader::fail(std::string_view message) const {
  throw std::runtime_error(path_.string() + ":" + std::to_string(line_no_) + ": " +
                           std::string(message));
}

KeyValues read_key_values(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  KeyValues out;
  std::istringstream in(content);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected key=value");
    }
    out[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
  }
  return out;
}

void write_key_values(const std::filesystem::path& path, const KeyValues& values) {
  std::string out;
  for (const auto& [k, v] : values) out += k + "=" + v + "\n";
  write_file(path, out);
}

}  // namespace plclab
