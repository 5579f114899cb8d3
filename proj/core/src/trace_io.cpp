// SPDX-License-Identifier: Apache-2.0
#include "plclab/trace_io.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <tuple>

#include "plclab/io.hpp"

namespace plclab {

namespace {

std::size_t require_count(const KeyValues& kv, const std::string& key,
                          const std::filesystem::path& path) {
  const auto it = kv.find(key);
  if (it == kv.end()) {
    throw std::runtime_error(path.string() + ": missing key '" + key + "'");
  }
  return parse_count(it->second);
}

}  // namespace

void write_trace(const std::filesystem::path& csv_path, const std::filesystem::path& meta_path,
                 const NoiseTrace& trace) {
  trace.validate();
  std::string out = "phase,index,value\n";
  out.reserve(out.size() + trace.phase_count() * trace.phases.front().size() * 28);
  for (std::size_t p = 0; p < trace.phase_count(); ++p) {
    const std::string prefix = std::to_string(p) + ",";
    const auto& samples = trace.phases[p];
    for (std::size_t i = 0; i < samples.size(); ++i) {
      out += prefix;
      out += std::to_string(i);
      out += ',';
      out += format_number(samples[i]);
      out += '\n';
    }
  }
  write_file(csv_path, out);

  write_key_values(meta_path, {
                                  {"n_periods", std::to_string(trace.n_periods)},
                                  {"n_phases", std::to_string(trace.phase_count())},
                                  {"sample_rate_hz", format_number(trace.sample_rate_hz)},
                                  {"samples_per_period", std::to_string(trace.samples_per_period)},
                                  {"warmup_samples", std::to_string(trace.warmup)},
                              });
}

NoiseTrace read_trace(const std::filesystem::path& csv_path,
                      const std::filesystem::path& meta_path) {
  const auto meta = read_key_values(meta_path);
  NoiseTrace trace;
  trace.samples_per_period = require_count(meta, "samples_per_period", meta_path);
  trace.n_periods = require_count(meta, "n_periods", meta_path);
  const std::size_t n_phases = require_count(meta, "n_phases", meta_path);
  if (const auto it = meta.find("sample_rate_hz"); it != meta.end()) {
    trace.sample_rate_hz = parse_number(it->second);
  } else {
    throw std::runtime_error(meta_path.string() + ": missing key 'sample_rate_hz'");
  }
  if (const auto it = meta.find("warmup_samples"); it != meta.end()) {
    trace.warmup = parse_count(it->second);
  }
  if (n_phases == 0 || trace.samples_per_period == 0) {
    throw std::runtime_error(meta_path.string() + ": n_phases and samples_per_period must be > 0");
  }

  const std::size_t per_phase = trace.n_periods * trace.samples_per_period;
  trace.phases.assign(n_phases, std::vector<double>(per_phase));
  std::vector<std::vector<bool>> seen(n_phases, std::vector<bool>(per_phase, false));

  CsvReader reader(csv_path, "phase,index,value");
  std::vector<std::string_view> fields;
  std::size_t rows = 0;
  while (reader.next(fields)) {
    if (fields.size() != 3) reader.fail("expected 3 fields");
    std::size_t phase = 0;
    std::size_t index = 0;
    double value = 0.0;
    try {
      phase = parse_count(fields[0]);
      index = parse_count(fields[1]);
      value = parse_number(fields[2]);
    } catch (const std::invalid_argument& e) {
      reader.fail(e.what());
    }
    if (phase >= n_phases || index >= per_phase) reader.fail("sample outside declared trace size");
    if (seen[phase][index]) reader.fail("duplicate sample");
    seen[phase][index] = true;
    trace.phases[phase][index] = value;
    ++rows;
  }
  if (rows != n_phases * per_phase) {
    throw std::runtime_error(csv_path.string() + ": expected " +
                             std::to_string(n_phases * per_phase) + " samples, found " +
                             std::to_string(rows));
  }
  return trace;
}

void write_filter_bank(const std::filesystem::path& path, const FreshFilterBank& bank) {
  std::string out = "branch,row,col,tap_index,re,im\n";
  for (std::size_t k = 0; k < bank.branches(); ++k) {
    for (std::size_t r = 0; r < bank.phases(); ++r) {
      for (std::size_t c = 0; c < bank.phases(); ++c) {
        for (std::size_t l = 0; l < bank.taps(); ++l) {
          const cplx v = bank.tap(k, r, c, l);
          out += std::to_string(k) + "," + std::to_string(r) + "," + std::to_string(c) + "," +
                 std::to_string(l) + "," + format_number(v.real()) + "," +
                 format_number(v.imag()) + "\n";
        }
      }
    }
  }
  write_file(path, out);
}

FreshFilterBank read_filter_bank(const std::filesystem::path& path, std::size_t period) {
  CsvReader reader(path, "branch,row,col,tap_index,re,im");
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t, cplx>> rows;
  std::size_t branches = 0;
  std::size_t phases = 0;
  std::size_t taps = 0;
  std::vector<std::string_view> fields;
  while (reader.next(fields)) {
    if (fields.size() != 6) reader.fail("expected 6 fields");
    try {
      const auto k = parse_count(fields[0]);
      const auto r = parse_count(fields[1]);
      const auto c = parse_count(fields[2]);
      const auto l = parse_count(fields[3]);
      const cplx v(parse_number(fields[4]), parse_number(fields[5]));
      branches = std::max(branches, k + 1);
      phases = std::max({phases, r + 1, c + 1});
      taps = std::max(taps, l + 1);
      rows.emplace_back(k, r, c, l, v);
    } catch (const std::invalid_argument& e) {
      reader.fail(e.what());
    }
  }
  if (rows.empty()) throw std::runtime_error(path.string() + ": filter bank has no taps");
  FreshFilterBank bank(branches, phases, taps, period);
  for (const auto& [k, r, c, l, v] : rows) bank.tap(k, r, c, l) = v;
  bank.validate();
  return bank;
}

}  // namespace plclab
