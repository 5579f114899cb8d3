// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>

#include "plclab/noise_gen.hpp"

namespace plclab {

// Trace files: CSV `phase,index,value` (0-based phase, index within the phase)
// plus a key=value sidecar with sample_rate_hz, samples_per_period, n_periods,
// n_phases and warmup_samples.

void write_trace(const std::filesystem::path& csv_path, const std::filesystem::path& meta_path,
                 const NoiseTrace& trace);

NoiseTrace read_trace(const std::filesystem::path& csv_path,
                      const std::filesystem::path& meta_path);

/// Filter bank CSV `branch,row,col,tap_index,re,im` (all indices 0-based).
void write_filter_bank(const std::filesystem::path& path, const FreshFilterBank& bank);

/// Dimensions are inferred from the largest indices present; missing taps are zero.
/// `period` == 0 selects the branch count.
FreshFilterBank read_filter_bank(const std::filesystem::path& path, std::size_t period = 0);

}  // namespace plclab
