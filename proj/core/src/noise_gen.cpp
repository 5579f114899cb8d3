// SPDX-License-Identifier: Apache-2.0
#include "plclab/noise_gen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "plclab/random.hpp"

namespace plclab {

namespace {

// rotation[m] = exp(-j 2 pi m / period); branch k at sample l uses
// rotation[(k * l) mod period], which keeps the phase exact for long traces.
std::vector<cplx> rotation_table(std::size_t period) {
  std::vector<cplx> table(period);
  for (std::size_t m = 0; m < period; ++m) {
    table[m] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(m) /
                                   static_cast<double>(period));
  }
  return table;
}

void shift_stream(std::span<const cplx> w, std::size_t k, std::size_t period,
                  const std::vector<cplx>& rotation, std::vector<cplx>& out) {
  out.resize(w.size());
  std::size_t idx = 0;
  const std::size_t step = k % period;
  for (std::size_t l = 0; l < w.size(); ++l) {
    out[l] = w[l] * rotation[idx];
    idx += step;
    if (idx >= period) idx -= period;
  }
}

bool all_zero(std::span<const cplx> taps) {
  for (const auto& v : taps) {
    if (v != cplx{}) return false;
  }
  return true;
}

// out[n] += sum_m taps[m] * x[n - m], zero pre-history.
void convolve_accumulate(std::span<const cplx> taps, std::span<const cplx> x,
                         std::span<cplx> out) {
  const std::size_t n_taps = taps.size();
  for (std::size_t n = 0; n < x.size(); ++n) {
    const std::size_t m_max = std::min(n_taps, n + 1);
    cplx acc = 0.0;
    for (std::size_t m = 0; m < m_max; ++m) acc += taps[m] * x[n - m];
    out[n] += acc;
  }
}

}  // namespace

std::size_t NoiseTrace::first_usable_period() const noexcept {
  if (samples_per_period == 0) return 0;
  return (warmup + samples_per_period - 1) / samples_per_period;
}

std::size_t NoiseTrace::usable_periods() const noexcept {
  const std::size_t first = first_usable_period();
  return n_periods > first ? n_periods - first : 0;
}

std::span<const double> NoiseTrace::segment(std::size_t phase, std::size_t period,
                                            std::size_t start, std::size_t count) const {
  if (phase >= phases.size() || period >= n_periods || start + count > samples_per_period) {
    throw std::out_of_range("NoiseTrace::segment: request outside the trace");
  }
  return std::span<const double>(phases[phase]).subspan(period * samples_per_period + start,
                                                        count);
}

void NoiseTrace::validate() const {
  if (phases.empty()) throw std::invalid_argument("noise trace has no phases");
  if (samples_per_period == 0) throw std::invalid_argument("samples_per_period must be > 0");
  const std::size_t expected = n_periods * samples_per_period;
  for (std::size_t p = 0; p < phases.size(); ++p) {
    if (phases[p].size() != expected) {
      throw std::invalid_argument("phase " + std::to_string(p) + " has " +
                                  std::to_string(phases[p].size()) + " samples, expected " +
                                  std::to_string(expected));
    }
  }
}

std::size_t samples_per_half_cycle(double sample_rate_hz, double mains_hz) {
  if (!(sample_rate_hz > 0.0) || !(mains_hz > 0.0)) {
    throw std::invalid_argument("sample rate and mains frequency must be positive");
  }
  const double n = sample_rate_hz / (2.0 * mains_hz);
  const double rounded = std::round(n);
  if (std::abs(n - rounded) > 1e-9 * n) {
    throw std::invalid_argument("half mains cycle is not an integer number of samples");
  }
  return static_cast<std::size_t>(rounded);
}

std::vector<double> gen_awgn(std::uint64_t seed, std::size_t n, double variance) {
  if (n == 0) throw std::invalid_argument("gen_awgn: n must be >= 1");
  if (!(variance >= 0.0)) throw std::invalid_argument("gen_awgn: variance must be >= 0");
  GaussianSource source(seed);
  const double sd = std::sqrt(variance);
  std::vector<double> out(n);
  for (auto& v : out) v = sd * source.normal();
  return out;
}

FreshFilterBank::FreshFilterBank(std::size_t branches, std::size_t phases, std::size_t taps,
                                 std::size_t period)
    : branches_(branches),
      phases_(phases),
      taps_(taps),
      period_(period == 0 ? branches : period),
      coeffs_(branches * phases * phases * taps) {
  validate();
}

double FreshFilterBank::cyclic_frequency(std::size_t k) const {
  return static_cast<double>(k) / static_cast<double>(period_);
}

std::size_t FreshFilterBank::offset(std::size_t k, std::size_t row, std::size_t col) const {
  return ((k * phases_ + row) * phases_ + col) * taps_;
}

cplx& FreshFilterBank::tap(std::size_t k, std::size_t row, std::size_t col, std::size_t l) {
  return coeffs_[offset(k, row, col) + l];
}

const cplx& FreshFilterBank::tap(std::size_t k, std::size_t row, std::size_t col,
                                 std::size_t l) const {
  return coeffs_[offset(k, row, col) + l];
}

std::span<const cplx> FreshFilterBank::filter(std::size_t k, std::size_t row,
                                              std::size_t col) const {
  return std::span<const cplx>(coeffs_).subspan(offset(k, row, col), taps_);
}

std::span<cplx> FreshFilterBank::filter(std::size_t k, std::size_t row, std::size_t col) {
  return std::span<cplx>(coeffs_).subspan(offset(k, row, col), taps_);
}

void FreshFilterBank::validate() const {
  if (branches_ == 0) throw std::invalid_argument("filter bank needs at least one branch");
  if (phases_ == 0) throw std::invalid_argument("filter bank needs at least one phase");
  if (taps_ == 0) throw std::invalid_argument("filter bank needs at least one tap");
  if (period_ < branches_) {
    // Keeps alpha_k strictly increasing inside [0, 1).
    throw std::invalid_argument("filter bank period must be >= branch count");
  }
  for (const auto& v : coeffs_) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw std::invalid_argument("filter bank has non-finite taps");
    }
  }
}

std::vector<cplx> fresh_siso(const FreshFilterBank& bank, std::span<const cplx> w) {
  if (bank.phases() != 1) throw std::invalid_argument("fresh_siso: bank must have one phase");
  if (w.size() < bank.taps()) {
    throw std::invalid_argument("fresh_siso: excitation shorter than the filter length");
  }
  const std::vector<std::vector<cplx>> streams{std::vector<cplx>(w.begin(), w.end())};
  return fresh_mimo(bank, streams).front();
}

std::vector<std::vector<cplx>> fresh_mimo(const FreshFilterBank& bank,
                                          std::span<const std::vector<cplx>> streams) {
  bank.validate();
  if (streams.size() != bank.phases()) {
    throw std::invalid_argument("fresh_mimo: bank has " + std::to_string(bank.phases()) +
                                " phases but " + std::to_string(streams.size()) +
                                " excitation streams were given");
  }
  const std::size_t n = streams.front().size();
  for (const auto& s : streams) {
    if (s.size() != n) throw std::invalid_argument("fresh_mimo: excitation lengths differ");
  }

  const auto rotation = rotation_table(bank.period());
  std::vector<std::vector<cplx>> out(bank.phases(), std::vector<cplx>(n));
  std::vector<cplx> shifted;
  for (std::size_t k = 0; k < bank.branches(); ++k) {
    for (std::size_t t = 0; t < bank.phases(); ++t) {
      shift_stream(streams[t], k, bank.period(), rotation, shifted);
      for (std::size_t r = 0; r < bank.phases(); ++r) {
        const auto taps = bank.filter(k, r, t);
        if (all_zero(taps)) continue;
        convolve_accumulate(taps, shifted, out[r]);
      }
    }
  }
  return out;
}

NoiseTrace generate_fresh_trace(const FreshFilterBank& bank, std::uint64_t seed,
                                std::size_t n_periods, std::size_t samples_per_period,
                                double sample_rate_hz) {
  if (n_periods == 0 || samples_per_period == 0) {
    throw std::invalid_argument("generate_fresh_trace: empty trace requested");
  }
  const std::size_t n = n_periods * samples_per_period;
  std::vector<std::vector<cplx>> streams(bank.phases());
  for (std::size_t t = 0; t < bank.phases(); ++t) {
    const auto w = gen_awgn(derive_seed(derive_seed(seed, "excitation"), t), n, 1.0);
    streams[t].assign(w.begin(), w.end());
  }
  const auto z = fresh_mimo(bank, streams);

  NoiseTrace trace;
  trace.sample_rate_hz = sample_rate_hz;
  trace.samples_per_period = samples_per_period;
  trace.n_periods = n_periods;
  trace.warmup = bank.taps() - 1;
  trace.phases.resize(bank.phases());
  for (std::size_t r = 0; r < bank.phases(); ++r) {
    trace.phases[r].resize(n);
    for (std::size_t i = 0; i < n; ++i) trace.phases[r][i] = z[r][i].real();
  }
  return trace;
}

FreshFilterBank synth_filter_bank(std::uint64_t seed, std::size_t branches, std::size_t taps,
                                  std::size_t phases, double decay, double coupling,
                                  std::size_t period) {
  if (branches == 0 || taps == 0 || phases == 0) {
    throw std::invalid_argument("synth_filter_bank: branches, taps and phases must be >= 1");
  }
  if (!(decay > 0.0 && decay <= 1.0)) {
    throw std::invalid_argument("synth_filter_bank: decay must lie in (0, 1]");
  }
  if (!(coupling >= 0.0 && coupling <= 1.0)) {
    throw std::invalid_argument("synth_filter_bank: coupling must lie in [0, 1]");
  }

  // Expected diagonal energy per output phase is normalized to one.
  double branch_energy = 0.0;
  for (std::size_t k = 0; k < branches; ++k) {
    branch_energy += 1.0 / std::pow(1.0 + static_cast<double>(k), 2.0);
  }
  double tap_energy = 0.0;
  for (std::size_t l = 0; l < taps; ++l) tap_energy += std::pow(decay, 2.0 * static_cast<double>(l));
  const double norm = 1.0 / std::sqrt(branch_energy * tap_energy);

  FreshFilterBank bank(branches, phases, taps, period);
  GaussianSource source(seed);
  for (std::size_t k = 0; k < branches; ++k) {
    const double branch_amp = norm / (1.0 + static_cast<double>(k));
    for (std::size_t r = 0; r < phases; ++r) {
      for (std::size_t t = 0; t < phases; ++t) {
        const double cross = r == t ? 1.0 : std::sqrt(coupling);
        for (std::size_t l = 0; l < taps; ++l) {
          const double re = source.normal();
          const double im = source.normal();
          const double amp = branch_amp * cross * std::pow(decay, static_cast<double>(l));
          bank.tap(k, r, t, l) = amp * cplx(re, im) / std::numbers::sqrt2;
        }
      }
    }
  }
  return bank;
}

std::size_t NassarModel::samples_per_period() const noexcept {
  std::size_t total = 0;
  for (const auto& r : regions) total += r.length;
  return total;
}

void NassarModel::validate() const {
  if (regions.empty()) throw std::invalid_argument("Nassar model has no regions");
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (regions[i].length == 0) {
      throw std::invalid_argument("Nassar region " + std::to_string(i) + " has zero length");
    }
    if (regions[i].taps.empty()) {
      throw std::invalid_argument("Nassar region " + std::to_string(i) + " has no taps");
    }
    for (double v : regions[i].taps) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("Nassar region " + std::to_string(i) +
                                    " has non-finite taps");
      }
    }
  }
}

NoiseTrace nassar_generate(const NassarModel& model, std::span<const double> w,
                           std::size_t n_periods, RegionState state) {
  model.validate();
  const std::size_t period = model.samples_per_period();
  if (n_periods == 0) throw std::invalid_argument("nassar_generate: n_periods must be >= 1");
  if (w.size() < n_periods * period) {
    throw std::invalid_argument("nassar_generate: excitation shorter than requested trace");
  }

  NoiseTrace trace;
  trace.samples_per_period = period;
  trace.n_periods = n_periods;
  trace.phases.assign(1, std::vector<double>(n_periods * period));
  auto& out = trace.phases.front();

  std::size_t start = 0;
  for (std::size_t p = 0; p < n_periods; ++p) {
    for (const auto& region : model.regions) {
      for (std::size_t i = 0; i < region.length; ++i) {
        const std::size_t n = start + i;
        // Under reset the filter only sees excitation from this region.
        const std::size_t history = state == RegionState::reset ? i : n;
        const std::size_t m_max = std::min(region.taps.size(), history + 1);
        double acc = 0.0;
        for (std::size_t m = 0; m < m_max; ++m) acc += region.taps[m] * w[n - m];
        out[n] = acc;
      }
      start += region.length;
    }
  }
  // Only the very first region of a carried trace starts from zero history.
  std::size_t longest = 0;
  for (const auto& r : model.regions) longest = std::max(longest, r.taps.size());
  trace.warmup = state == RegionState::carry ? longest - 1 : 0;
  return trace;
}

}  // namespace plclab
