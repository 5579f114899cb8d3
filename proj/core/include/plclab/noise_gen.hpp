// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "plclab/matrix.hpp"

namespace plclab {

/// Multi-phase real-valued noise record with period bookkeeping.
///
/// Samples are stored per phase. The first `warmup` samples come from a
/// zero pre-history filter state; analysis code skips every period that
/// overlaps them (see first_usable_period()).
struct NoiseTrace {
  std::vector<std::vector<double>> phases;
  double sample_rate_hz = 0.0;
  std::size_t samples_per_period = 0;
  std::size_t n_periods = 0;
  std::size_t warmup = 0;

  std::size_t phase_count() const noexcept { return phases.size(); }
  std::size_t first_usable_period() const noexcept;
  std::size_t usable_periods() const noexcept;

  /// Samples [start, start + count) of period `period` (absolute index) in `phase`.
  std::span<const double> segment(std::size_t phase, std::size_t period, std::size_t start,
                                  std::size_t count) const;

  /// Throws std::invalid_argument if the phase lengths disagree with the metadata.
  void validate() const;
};

/// Samples per noise period for a half mains cycle.
std::size_t samples_per_half_cycle(double sample_rate_hz, double mains_hz);

/// i.i.d. N(0, variance) samples; deterministic in `seed`.
std::vector<double> gen_awgn(std::uint64_t seed, std::size_t n, double variance);

/// Frequency-shift filter bank: `branches` LTI filter matrices of size
/// phases x phases, each entry an FIR of `taps` coefficients.
///
/// Branch k is fed the input shifted by the cyclic frequency
/// alpha_k = k / period. With period == branches this is the classic
/// alpha_k = k / K grid; setting period to the samples per noise cycle puts the
/// cyclic frequencies on harmonics of the mains half-cycle.
class FreshFilterBank {
 public:
  FreshFilterBank() = default;
  FreshFilterBank(std::size_t branches, std::size_t phases, std::size_t taps,
                  std::size_t period = 0);

  std::size_t branches() const noexcept { return branches_; }
  std::size_t phases() const noexcept { return phases_; }
  std::size_t taps() const noexcept { return taps_; }
  std::size_t period() const noexcept { return period_; }

  double cyclic_frequency(std::size_t k) const;

  cplx& tap(std::size_t k, std::size_t row, std::size_t col, std::size_t l);
  const cplx& tap(std::size_t k, std::size_t row, std::size_t col, std::size_t l) const;
  std::span<const cplx> filter(std::size_t k, std::size_t row, std::size_t col) const;
  std::span<cplx> filter(std::size_t k, std::size_t row, std::size_t col);

  /// Number of FIR vectors (branches * phases^2).
  std::size_t filter_count() const noexcept { return branches_ * phases_ * phases_; }

  void validate() const;

 private:
  std::size_t offset(std::size_t k, std::size_t row, std::size_t col) const;

  std::size_t branches_ = 0;
  std::size_t phases_ = 0;
  std::size_t taps_ = 0;
  std::size_t period_ = 0;
  std::vector<cplx> coeffs_;
};

/// SISO FRESH filtering: z[n] = sum_k sum_l g_k[n - l] w[l] exp(-j 2 pi alpha_k l),
/// zero pre-history, output length == input length.
std::vector<cplx> fresh_siso(const FreshFilterBank& bank, std::span<const cplx> w);

/// MIMO FRESH filtering; output phase r sums branch filters (r, t) applied to
/// the shifted excitation stream t.
std::vector<std::vector<cplx>> fresh_mimo(const FreshFilterBank& bank,
                                          std::span<const std::vector<cplx>> streams);

/// Generates `n_periods` periods of real-valued MIMO FRESH noise from
/// independent unit-variance excitations per phase. The returned trace
/// carries warmup = taps - 1.
NoiseTrace generate_fresh_trace(const FreshFilterBank& bank, std::uint64_t seed,
                                std::size_t n_periods, std::size_t samples_per_period,
                                double sample_rate_hz);

/// Random bank with geometric tap decay and 1/(1+k) branch amplitude roll-off.
/// Off-diagonal filter energy is `coupling` times the diagonal energy.
FreshFilterBank synth_filter_bank(std::uint64_t seed, std::size_t branches, std::size_t taps,
                                  std::size_t phases, double decay, double coupling,
                                  std::size_t period = 0);

struct NassarRegion {
  std::vector<double> taps;
  std::size_t length = 0;
};

/// Sequential-filter cyclostationary model: within each period, region i is
/// the excitation filtered by taps_i.
struct NassarModel {
  std::vector<NassarRegion> regions;

  std::size_t samples_per_period() const noexcept;
  void validate() const;
};

enum class RegionState { reset, carry };

/// Single-phase trace of `n_periods` periods. With RegionState::reset each
/// region filter starts from an empty history at its boundary; with carry it
/// sees the preceding excitation samples.
NoiseTrace nassar_generate(const NassarModel& model, std::span<const double> w,
                           std::size_t n_periods, RegionState state = RegionState::reset);

}  // namespace plclab
