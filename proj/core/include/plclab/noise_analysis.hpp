// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "plclab/noise_gen.hpp"

namespace plclab {

/// Contiguous OFDM-symbol-length slots of one noise period.
struct SlotMap {
  std::size_t n_slots = 0;
  std::size_t slot_length = 0;  ///< n_fft + n_cp
};

SlotMap slice_slots(std::size_t samples_per_period, std::size_t n_fft, std::size_t n_cp);
SlotMap slice_slots(const NoiseTrace& trace, std::size_t n_fft, std::size_t n_cp);

/// Division of each slot into `division` portions of portion_length + n_cp samples.
///
/// With slot length S = n_fft + n_cp, the payload length is
/// floor(S / division) - n_cp; division is a power of two no larger than
/// max_division(). Portion p of a period starts at
/// (p / division) * S + (p % division) * floor(S / division).
struct PortionPartition {
  std::size_t n_slots = 0;
  std::size_t n_fft = 0;
  std::size_t n_cp = 0;
  std::size_t division = 1;
  std::size_t portion_length = 0;  ///< N_p, payload samples excluding CP
  bool gaussian = true;            ///< false when even the finest division failed

  static PortionPartition make(std::size_t samples_per_period, std::size_t n_fft,
                               std::size_t n_cp, std::size_t division);

  /// Largest admissible division: 2^floor(log2((n_fft + n_cp) / (1 + n_cp))).
  static std::size_t max_division(std::size_t n_fft, std::size_t n_cp);

  std::size_t slot_length() const noexcept { return n_fft + n_cp; }
  std::size_t portion_span() const noexcept { return portion_length + n_cp; }
  std::size_t portion_count() const noexcept { return n_slots * division; }
  std::size_t slot_of(std::size_t portion) const noexcept { return portion / division; }
  /// Offset of the portion (CP included) from the start of its period.
  std::size_t portion_offset(std::size_t portion) const;
  /// Offset of the first payload sample (after the CP part).
  std::size_t payload_offset(std::size_t portion) const { return portion_offset(portion) + n_cp; }
};

struct SlotClassification {
  std::vector<int> labels;        ///< class 1, 2 or 3 per slot position
  std::vector<double> sigma;      ///< per-slot std deviation averaged over periods
  std::vector<double> distance;   ///< D^s = sigma^s - sigma_min
  double sigma_min = 0.0;         ///< minimum over every slot instance used
  double th1 = 0.0;
  double th2 = 0.0;
  std::size_t periods_used = 0;
};

/// Variance-tier slot classification. Each slot instance's population
/// standard deviation is taken over all phases jointly; the per-position
/// values are averaged across the N_period periods before the two-threshold split.
SlotClassification classify_slots(const NoiseTrace& trace, std::size_t n_fft, std::size_t n_cp,
                                  double th1, double th2, std::size_t n_period);

struct EmpiricalPdf {
  std::vector<double> edges;          ///< n_bins + 1, strictly increasing
  std::vector<double> probabilities;  ///< per bin, sums to one
  std::size_t count = 0;

  std::size_t bins() const noexcept { return probabilities.size(); }
};

/// Equal-width histogram over [min, max]; the last bin is closed.
EmpiricalPdf histogram(std::span<const double> samples, std::size_t n_bins);

/// Histogram counts on fixed edges (values outside the edges are clamped to
/// the end bins).
std::vector<std::size_t> bin_counts(std::span<const double> samples,
                                    std::span<const double> edges);

/// Gaussian mass of each histogram bin (difference of normal CDFs).
std::vector<double> gaussian_bin_mass(std::span<const double> edges, double mean,
                                      double variance);

/// Discrete KL divergence D(q || g) in nats between the histogram and the bin
/// masses of N(mean, variance). Empty bins contribute nothing; zero Gaussian
/// mass is floored at 1e-300.
double kld_vs_gaussian(const EmpiricalPdf& pdf, double mean, double variance);

struct MeanVariance {
  double mean = 0.0;
  double variance = 0.0;
  std::size_t count = 0;
};

/// Mean and population variance of a portion (CP included) over n_period
/// periods. `phase` selects one phase; nullopt pools every phase.
MeanVariance portion_stats(const NoiseTrace& trace, const PortionPartition& partition,
                           std::size_t portion, std::size_t n_period,
                           std::optional<std::size_t> phase = std::nullopt);

struct GaussianityOptions {
  double threshold = 0.4;  ///< nats
  std::size_t iterations = 1000;
  std::size_t n_period = 20;
  std::size_t bins = 64;
  std::uint64_t seed = 0;
};

struct PortionDivergence {
  std::size_t division = 0;
  std::size_t portion = 0;
  double kld = 0.0;  ///< bootstrap-averaged, maximum over phases
  bool pass = false;
};

struct GaussianityResult {
  PortionPartition partition;
  std::vector<PortionDivergence> table;  ///< every (division, portion) evaluated, ascending
};

/// Bootstrap-averaged divergence of one portion for one phase. Histogram
/// edges come from the pooled samples of all n_period periods; each
/// iteration resamples the periods with replacement.
double portion_divergence(const NoiseTrace& trace, const PortionPartition& partition,
                          std::size_t portion, std::size_t phase,
                          const GaussianityOptions& options);

/// Tries divisions 1, 2, 4, ... and returns the first one whose portions
/// all pass; otherwise the finest division flagged non-Gaussian.
GaussianityResult gaussianity_search(const NoiseTrace& trace, std::size_t n_fft,
                                     std::size_t n_cp, const GaussianityOptions& options);

}  // namespace plclab
