// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "plclab/channel.hpp"
#include "plclab/config.hpp"
#include "plclab/noise_analysis.hpp"
#include "plclab/noise_gen.hpp"

namespace plclab {

/// Artifact file names inside the output directory.
namespace artifact {
inline constexpr const char* plan = "plan.meta";
inline constexpr const char* trace = "trace.csv";
inline constexpr const char* trace_meta = "trace.meta";
inline constexpr const char* bank = "bank.csv";
inline constexpr const char* channel = "channel.csv";
inline constexpr const char* channel_response = "channel_response.csv";
inline constexpr const char* classification = "classification.csv";
inline constexpr const char* gaussianity = "gaussianity.csv";
inline constexpr const char* partition = "partition.meta";
inline constexpr const char* whitening = "whitening.csv";
inline constexpr const char* correlation = "correlation.csv";
inline constexpr const char* eigen = "eigen.csv";
inline constexpr const char* calibration = "calibration.meta";
inline constexpr const char* capacity = "capacity.csv";
inline constexpr const char* allocation = "allocation.csv";
}  // namespace artifact

/// Failure inside a named pipeline stage (e.g. "channel.load").
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message);
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Structural parameters of a run, derived without generating noise.
struct PlanSummary {
  double sample_rate_hz = 0.0;
  std::size_t samples_per_period = 0;
  std::size_t n_slots = 0;
  std::size_t slot_length = 0;
  std::size_t max_division = 0;
  std::size_t channel_rx = 0;
  std::size_t channel_tx = 0;
  std::size_t channel_taps = 0;
  std::size_t bank_branches = 0;  ///< 0 unless the noise source is FRESH
  std::size_t bank_taps = 0;
  std::size_t bank_filters = 0;
};

PlanSummary describe(const PipelineConfig& config);

/// The synthesized or loaded pieces of a run.
FreshFilterBank make_filter_bank(const PipelineConfig& config);
NoiseTrace make_noise(const PipelineConfig& config);
MimoChannel make_channel(const PipelineConfig& config);

/// Average-SNR calibration inputs plus the framing needed by the sweep.
struct Calibration {
  double noise_variance = 0.0;  ///< per-sample variance averaged over the period and phases
  double channel_gain = 0.0;    ///< MimoChannel::mean_gain()
  double sample_rate_hz = 0.0;
  std::size_t rx = 0;
  std::size_t tx = 0;
  std::size_t n_p = 0;
  std::size_t n_cp = 0;
  std::size_t division = 0;
  std::size_t n_slots = 0;
};

Calibration calibrate(const NoiseTrace& trace, const PortionPartition& partition,
                      const MimoChannel& chan, std::size_t n_period);

/// Eigenvalues of the whitened composite channel per portion, in the time
/// domain and after the block DFT (either may be left empty).
struct EigenTable {
  std::vector<std::vector<double>> time;
  std::vector<std::vector<double>> frequency;
};

EigenTable compute_eigen(const NoiseTrace& trace, const PortionPartition& partition,
                         const MimoChannel& chan, std::size_t n_period, bool time,
                         bool frequency);

struct CapacityRow {
  double snr_db = 0.0;
  std::string mode;    ///< "csit" | "no-csit"
  std::string domain;  ///< "time" | "frequency"
  std::string scope;   ///< "portion" | "slot" | "class" | "overall"
  std::size_t scope_id = 0;
  double bits = 0.0;
  double bits_per_sec = 0.0;
};

struct AllocationRow {
  double snr_db = 0.0;
  std::size_t portion = 0;
  std::size_t eig_index = 0;
  double eigenvalue = 0.0;
  double power = 0.0;
};

struct SweepResult {
  std::vector<CapacityRow> rows;
  std::vector<AllocationRow> allocations;  ///< CSIT, time domain (frequency if time absent)
};

/// Capacity per portion, slot, class and overall for every SNR, mode and
/// domain. No-CSIT spreads eps on every input dimension; CSIT waterfills the
/// same per-portion budget eps * M_t * N_p over the eigenchannels.
SweepResult capacity_sweep(const EigenTable& eigen, const Calibration& cal,
                           std::span<const int> labels, const PipelineConfig& config);

void stage_generate(const PipelineConfig& config, std::ostream* log = nullptr);
void stage_classify(const PipelineConfig& config, std::ostream* log = nullptr);
void stage_gaussianity(const PipelineConfig& config, std::ostream* log = nullptr);
void stage_whiten(const PipelineConfig& config, std::ostream* log = nullptr);
void stage_capacity(const PipelineConfig& config, std::ostream* log = nullptr);
void stage_sweep(const PipelineConfig& config, std::ostream* log = nullptr);

/// Renders the four capacity-vs-SNR plots (slot and class scope, with and
/// without CSIT) from a capacity CSV. Returns the files written.
std::vector<std::filesystem::path> render_report(const std::filesystem::path& capacity_csv,
                                                 const std::filesystem::path& out_dir);
void stage_report(const PipelineConfig& config, std::ostream* log = nullptr);

/// Validates, then runs every stage in order.
void run_pipeline(const PipelineConfig& config, std::ostream* log = nullptr);

}  // namespace plclab
