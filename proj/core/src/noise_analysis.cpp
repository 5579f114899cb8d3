// SPDX-License-Identifier: Apache-2.0
#include "plclab/noise_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "plclab/numerics.hpp"
#include "plclab/random.hpp"

namespace plclab {

namespace {

constexpr double kMassFloor = 1e-300;

void require_periods(const NoiseTrace& trace, std::size_t n_period) {
  if (n_period == 0) throw std::invalid_argument("N_period must be >= 1");
  if (trace.usable_periods() < n_period) {
    throw std::invalid_argument("requested " + std::to_string(n_period) +
                                " periods but the trace has only " +
                                std::to_string(trace.usable_periods()) +
                                " usable (post warm-up) periods");
  }
}

double lower_cdf(double x, double mean, double sd) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2));
}

double upper_cdf(double x, double mean, double sd) {
  return 0.5 * std::erfc((x - mean) / (sd * std::numbers::sqrt2));
}

double divergence(std::span<const std::size_t> counts, std::size_t total,
                  std::span<const double> gauss_mass) {
  double d = 0.0;
  const double n = static_cast<double>(total);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) continue;
    const double q = static_cast<double>(counts[i]) / n;
    d += q * std::log(q / std::max(gauss_mass[i], kMassFloor));
  }
  return d;
}

}  // namespace

SlotMap slice_slots(std::size_t samples_per_period, std::size_t n_fft, std::size_t n_cp) {
  if (n_fft == 0) throw std::invalid_argument("N_fft must be >= 1");
  const std::size_t slot = n_fft + n_cp;
  if (samples_per_period % slot != 0) {
    throw std::invalid_argument("slot length " + std::to_string(slot) +
                                " does not divide the period of " +
                                std::to_string(samples_per_period) + " samples (remainder " +
                                std::to_string(samples_per_period % slot) + ")");
  }
  return SlotMap{samples_per_period / slot, slot};
}

SlotMap slice_slots(const NoiseTrace& trace, std::size_t n_fft, std::size_t n_cp) {
  return slice_slots(trace.samples_per_period, n_fft, n_cp);
}

std::size_t PortionPartition::max_division(std::size_t n_fft, std::size_t n_cp) {
  const std::size_t slot = n_fft + n_cp;
  std::size_t a = 1;
  while (2 * a * (1 + n_cp) <= slot) a *= 2;
  return a;
}

PortionPartition PortionPartition::make(std::size_t samples_per_period, std::size_t n_fft,
                                        std::size_t n_cp, std::size_t division) {
  const auto slots = slice_slots(samples_per_period, n_fft, n_cp);
  if (!is_power_of_two(division) || division > max_division(n_fft, n_cp)) {
    throw std::invalid_argument("division factor " + std::to_string(division) +
                                " is not a power of two in [1, " +
                                std::to_string(max_division(n_fft, n_cp)) + "]");
  }
  PortionPartition p;
  p.n_slots = slots.n_slots;
  p.n_fft = n_fft;
  p.n_cp = n_cp;
  p.division = division;
  p.portion_length = slots.slot_length / division - n_cp;
  return p;
}

std::size_t PortionPartition::portion_offset(std::size_t portion) const {
  if (portion >= portion_count()) {
    throw std::out_of_range("portion index " + std::to_string(portion) + " >= " +
                            std::to_string(portion_count()));
  }
  return (portion / division) * slot_length() + (portion % division) * (slot_length() / division);
}

SlotClassification classify_slots(const NoiseTrace& trace, std::size_t n_fft, std::size_t n_cp,
                                  double th1, double th2, std::size_t n_period) {
  if (!(th1 < th2)) throw std::invalid_argument("classification thresholds misordered");
  trace.validate();
  const auto slots = slice_slots(trace, n_fft, n_cp);
  require_periods(trace, n_period);

  SlotClassification out;
  out.th1 = th1;
  out.th2 = th2;
  out.periods_used = n_period;
  out.sigma.assign(slots.n_slots, 0.0);
  out.sigma_min = std::numeric_limits<double>::infinity();

  const std::size_t first = trace.first_usable_period();
  const double count = static_cast<double>(slots.slot_length * trace.phase_count());
  for (std::size_t p = first; p < first + n_period; ++p) {
    for (std::size_t s = 0; s < slots.n_slots; ++s) {
      double sum = 0.0;
      for (std::size_t ph = 0; ph < trace.phase_count(); ++ph) {
        for (double v : trace.segment(ph, p, s * slots.slot_length, slots.slot_length)) sum += v;
      }
      const double mean = sum / count;
      double ss = 0.0;
      for (std::size_t ph = 0; ph < trace.phase_count(); ++ph) {
        for (double v : trace.segment(ph, p, s * slots.slot_length, slots.slot_length)) {
          ss += (v - mean) * (v - mean);
        }
      }
      const double sigma = std::sqrt(ss / count);
      out.sigma[s] += sigma;
      out.sigma_min = std::min(out.sigma_min, sigma);
    }
  }

  out.labels.resize(slots.n_slots);
  out.distance.resize(slots.n_slots);
  for (std::size_t s = 0; s < slots.n_slots; ++s) {
    out.sigma[s] /= static_cast<double>(n_period);
    const double d = out.sigma[s] - out.sigma_min;
    out.distance[s] = d;
    out.labels[s] = d <= th1 ? 1 : (d <= th2 ? 2 : 3);
  }
  return out;
}

EmpiricalPdf histogram(std::span<const double> samples, std::size_t n_bins) {
  if (n_bins < 2) throw std::invalid_argument("histogram: need at least 2 bins");
  if (samples.empty()) throw std::invalid_argument("histogram: no samples");
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) throw std::invalid_argument("histogram: zero-width support");

  EmpiricalPdf pdf;
  pdf.edges.resize(n_bins + 1);
  const double width = (hi - lo) / static_cast<double>(n_bins);
  for (std::size_t i = 0; i <= n_bins; ++i) pdf.edges[i] = lo + width * static_cast<double>(i);
  pdf.edges.back() = hi;

  const auto counts = bin_counts(samples, pdf.edges);
  pdf.count = samples.size();
  pdf.probabilities.resize(n_bins);
  for (std::size_t i = 0; i < n_bins; ++i) {
    pdf.probabilities[i] = static_cast<double>(counts[i]) / static_cast<double>(pdf.count);
  }
  return pdf;
}

std::vector<std::size_t> bin_counts(std::span<const double> samples,
                                    std::span<const double> edges) {
  if (edges.size() < 2) throw std::invalid_argument("bin_counts: need at least one bin");
  const std::size_t n_bins = edges.size() - 1;
  std::vector<std::size_t> counts(n_bins, 0);
  for (double v : samples) {
    // Bin i holds [edges[i], edges[i+1]); the last bin is closed on the right.
    const auto it = std::upper_bound(edges.begin(), edges.end(), v);
    std::size_t idx = it == edges.begin() ? 0 : static_cast<std::size_t>(it - edges.begin()) - 1;
    idx = std::min(idx, n_bins - 1);
    ++counts[idx];
  }
  return counts;
}

std::vector<double> gaussian_bin_mass(std::span<const double> edges, double mean,
                                      double variance) {
  if (!(variance > 0.0)) throw std::invalid_argument("gaussian_bin_mass: variance must be > 0");
  const double sd = std::sqrt(variance);
  std::vector<double> mass(edges.size() - 1);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double a = edges[i];
    const double b = edges[i + 1];
    // Use the tail on the bin's own side to avoid cancellation.
    mass[i] = a >= mean ? upper_cdf(a, mean, sd) - upper_cdf(b, mean, sd)
                        : lower_cdf(b, mean, sd) - lower_cdf(a, mean, sd);
  }
  return mass;
}

double kld_vs_gaussian(const EmpiricalPdf& pdf, double mean, double variance) {
  if (!(variance > 0.0)) throw std::invalid_argument("kld_vs_gaussian: variance must be > 0");
  const auto g = gaussian_bin_mass(pdf.edges, mean, variance);
  double d = 0.0;
  for (std::size_t i = 0; i < pdf.bins(); ++i) {
    const double q = pdf.probabilities[i];
    if (q <= 0.0) continue;
    d += q * std::log(q / std::max(g[i], kMassFloor));
  }
  return d;
}

MeanVariance portion_stats(const NoiseTrace& trace, const PortionPartition& partition,
                           std::size_t portion, std::size_t n_period,
                           std::optional<std::size_t> phase) {
  trace.validate();
  require_periods(trace, n_period);
  if (phase && *phase >= trace.phase_count()) {
    throw std::out_of_range("phase index out of range");
  }
  const std::size_t offset = partition.portion_offset(portion);
  const std::size_t span = partition.portion_span();
  const std::size_t first = trace.first_usable_period();
  const std::size_t ph_begin = phase ? *phase : 0;
  const std::size_t ph_end = phase ? *phase + 1 : trace.phase_count();

  MeanVariance mv;
  double sum = 0.0;
  for (std::size_t p = first; p < first + n_period; ++p) {
    for (std::size_t ph = ph_begin; ph < ph_end; ++ph) {
      for (double v : trace.segment(ph, p, offset, span)) sum += v;
      mv.count += span;
    }
  }
  mv.mean = sum / static_cast<double>(mv.count);
  double ss = 0.0;
  for (std::size_t p = first; p < first + n_period; ++p) {
    for (std::size_t ph = ph_begin; ph < ph_end; ++ph) {
      for (double v : trace.segment(ph, p, offset, span)) ss += (v - mv.mean) * (v - mv.mean);
    }
  }
  mv.variance = ss / static_cast<double>(mv.count);
  return mv;
}

double portion_divergence(const NoiseTrace& trace, const PortionPartition& partition,
                          std::size_t portion, std::size_t phase,
                          const GaussianityOptions& options) {
  if (options.iterations == 0) throw std::invalid_argument("N_itr must be >= 1");
  require_periods(trace, options.n_period);
  const std::size_t offset = partition.portion_offset(portion);
  const std::size_t span = partition.portion_span();
  const std::size_t first = trace.first_usable_period();
  const std::size_t n_period = options.n_period;

  std::vector<double> pooled;
  pooled.reserve(n_period * span);
  for (std::size_t p = first; p < first + n_period; ++p) {
    const auto seg = trace.segment(phase, p, offset, span);
    pooled.insert(pooled.end(), seg.begin(), seg.end());
  }
  const auto pdf = histogram(pooled, options.bins);

  // Per-period sufficient statistics, so a bootstrap draw is just a sum.
  std::vector<std::vector<std::size_t>> counts(n_period);
  std::vector<double> sums(n_period, 0.0);
  std::vector<double> squares(n_period, 0.0);
  for (std::size_t i = 0; i < n_period; ++i) {
    const auto seg = std::span<const double>(pooled).subspan(i * span, span);
    counts[i] = bin_counts(seg, pdf.edges);
    for (double v : seg) {
      sums[i] += v;
      squares[i] += v * v;
    }
  }

  GaussianSource rng(derive_seed(options.seed, partition.division, portion, phase));
  std::vector<std::size_t> agg(options.bins);
  const std::size_t total = n_period * span;
  double acc = 0.0;
  for (std::size_t it = 0; it < options.iterations; ++it) {
    std::fill(agg.begin(), agg.end(), 0);
    double s = 0.0;
    double ss = 0.0;
    for (std::size_t draw = 0; draw < n_period; ++draw) {
      const auto pick = static_cast<std::size_t>(rng.index(n_period));
      for (std::size_t b = 0; b < agg.size(); ++b) agg[b] += counts[pick][b];
      s += sums[pick];
      ss += squares[pick];
    }
    const double mean = s / static_cast<double>(total);
    const double var = ss / static_cast<double>(total) - mean * mean;
    if (!(var > 0.0)) return std::numeric_limits<double>::infinity();
    acc += divergence(agg, total, gaussian_bin_mass(pdf.edges, mean, var));
  }
  return acc / static_cast<double>(options.iterations);
}

GaussianityResult gaussianity_search(const NoiseTrace& trace, std::size_t n_fft,
                                     std::size_t n_cp, const GaussianityOptions& options) {
  if (!(options.threshold > 0.0)) {
    throw std::invalid_argument("Gaussianity threshold must be > 0");
  }
  trace.validate();
  require_periods(trace, options.n_period);

  GaussianityResult result;
  const std::size_t max_div = PortionPartition::max_division(n_fft, n_cp);
  for (std::size_t division = 1; division <= max_div; division *= 2) {
    auto partition = PortionPartition::make(trace.samples_per_period, n_fft, n_cp, division);
    bool all_pass = true;
    for (std::size_t p = 0; p < partition.portion_count(); ++p) {
      double worst = 0.0;
      for (std::size_t ph = 0; ph < trace.phase_count(); ++ph) {
        worst = std::max(worst, portion_divergence(trace, partition, p, ph, options));
      }
      const bool pass = worst < options.threshold;
      all_pass = all_pass && pass;
      result.table.push_back({division, p, worst, pass});
    }
    result.partition = partition;
    if (all_pass) return result;
  }
  result.partition.gaussian = false;
  return result;
}

}  // namespace plclab
