// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "plclab/io.hpp"
#include "plclab/noise_gen.hpp"

namespace plclab {

enum class NoiseKind { fresh, nassar, file };
enum class ChannelKind { synthetic, file };

/// Everything a pipeline run needs. Defaults are the full-scale structural
/// parameters (400 kHz, 3200-sample half cycle, N_fft 256, N_cp 64, K 19,
/// 65-tap filters and channel, 2 phases).
struct PipelineConfig {
  NoiseKind noise_kind = NoiseKind::fresh;
  std::filesystem::path noise_trace;  ///< file kind: trace CSV
  std::filesystem::path noise_meta;   ///< file kind: sidecar; default trace path with .meta
  double sample_rate_hz = 400e3;
  double mains_hz = 0.0;  ///< when > 0, samples_per_period is derived from it
  std::size_t samples_per_period = 3200;
  std::size_t n_periods = 600;
  std::size_t phases = 2;

  std::size_t fresh_branches = 19;
  std::size_t fresh_taps = 65;
  double fresh_decay = 0.9;
  double fresh_coupling = 0.3;
  std::size_t fresh_period = 0;  ///< 0: one noise period

  std::vector<double> nassar_gains;          ///< per-region standard deviation
  std::vector<std::size_t> nassar_lengths;   ///< per-region samples, summing to the period
  std::size_t nassar_taps = 8;
  double nassar_decay = 0.6;
  RegionState nassar_state = RegionState::reset;

  ChannelKind channel_kind = ChannelKind::synthetic;
  std::filesystem::path channel_path;
  std::size_t channel_taps = 65;  ///< synthetic length, or declared L for files (0: infer)
  double channel_decay = 0.9;

  std::size_t n_fft = 256;
  std::size_t n_cp = 64;

  double th1 = 0.05;
  double th2 = 0.2;
  std::size_t analysis_n_period = 20;

  double kld_threshold = 0.4;
  std::size_t kld_iterations = 1000;
  std::size_t kld_bins = 64;

  std::size_t whiten_n_period = 0;  ///< 0: every usable period
  bool whiten_dump = false;

  std::vector<double> snr_db = {0, 5, 10, 15, 20, 25, 30, 35, 40};
  bool mode_csit = true;
  bool mode_no_csit = true;
  bool domain_time = true;
  bool domain_frequency = true;
  /// Experimental: adds a "csit-joint" mode that waterfills one budget over
  /// every portion of the period instead of per portion.
  bool joint_waterfill = false;

  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 42;
};

/// Parse error in a configuration file or value.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Applies key=value pairs over the defaults. Relative paths are resolved
/// against `base_dir`. Unknown keys are rejected.
PipelineConfig parse_config(const KeyValues& values, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

/// Canonical key=value form of a config (round-trips through parse_config).
KeyValues config_to_key_values(const PipelineConfig& config);

struct Diagnostic {
  std::string stage;
  std::string message;
};

/// Every violation found; empty iff the config is runnable.
std::vector<Diagnostic> validate(const PipelineConfig& config);

/// Samples per period after resolving mains_hz and, for file traces, the sidecar.
std::size_t effective_samples_per_period(const PipelineConfig& config);

}  // namespace plclab
