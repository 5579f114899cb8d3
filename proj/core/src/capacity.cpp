// SPDX-License-Identifier: Apache-2.0
#include "plclab/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "plclab/channel.hpp"

namespace plclab {

namespace {

constexpr double kRankFloor = 1e-12;

double log2_det_identity_plus(const ComplexMatrix& h, double eps, const NumericTolerances& tol) {
  ComplexMatrix a = gram(h);
  a *= eps;
  for (std::size_t i = 0; i < a.rows(); ++i) a(i, i) += 1.0;
  return logdet_psd(a, tol) / std::log(2.0);
}

}  // namespace

std::vector<double> eigen_channels(const ComplexMatrix& h, const NumericTolerances& tol) {
  if (h.empty()) return {};
  const ComplexMatrix g = h.rows() <= h.cols() ? gram(h) : gram(h.adjoint());
  auto eig = eig_hermitian(g, tol, EigenOptions{.vectors = false, .clamp_psd = true});
  const double top = eig.values.empty() ? 0.0 : std::max(eig.values.front(), 0.0);
  for (auto& v : eig.values) {
    if (v < kRankFloor * top) v = 0.0;
  }
  return eig.values;
}

double capacity_from_eigs(std::span<const double> eigs, double eps) {
  if (eps < 0.0) throw std::invalid_argument("capacity: power must be >= 0");
  double bits = 0.0;
  for (double d : eigs) bits += std::log2(1.0 + eps * std::max(d, 0.0));
  return bits;
}

double capacity_equal_power(const ComplexMatrix& h, double eps, const NumericTolerances& tol) {
  return capacity_from_eigs(eigen_channels(h, tol), eps);
}

double capacity_logdet(const ComplexMatrix& h, double eps, const NumericTolerances& tol) {
  if (eps < 0.0) throw std::invalid_argument("capacity: power must be >= 0");
  return log2_det_identity_plus(h, eps, tol);
}

WaterfillResult waterfill(std::span<const double> eigs, double total) {
  if (!(total >= 0.0)) throw std::invalid_argument("waterfill: total power must be >= 0");
  WaterfillResult out;
  out.power.assign(eigs.size(), 0.0);
  double top = 0.0;
  for (double d : eigs) top = std::max(top, d);
  if (!(top > 0.0)) throw std::domain_error("zero-rank channel");
  if (total == 0.0) return out;

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < eigs.size(); ++i) {
    if (eigs[i] >= kRankFloor * top && eigs[i] > 0.0) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return eigs[a] > eigs[b]; });

  // Shrink the active set from the weakest channel until the level clears it.
  std::vector<double> inv_prefix(order.size() + 1, 0.0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    inv_prefix[i + 1] = inv_prefix[i] + 1.0 / eigs[order[i]];
  }
  std::size_t k = order.size();
  double mu = 0.0;
  while (k > 0) {
    mu = (total + inv_prefix[k]) / static_cast<double>(k);
    if (mu > 1.0 / eigs[order[k - 1]]) break;
    --k;
  }
  out.mu = mu;
  out.active = k;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t idx = order[i];
    out.power[idx] = mu - 1.0 / eigs[idx];
    out.bits += std::log2(1.0 + out.power[idx] * eigs[idx]);
  }
  return out;
}

double capacity_freq_nowhiten(std::span<const ComplexMatrix> hk, double eps,
                              const NumericTolerances& tol) {
  if (eps < 0.0) throw std::invalid_argument("capacity: power must be >= 0");
  double bits = 0.0;
  for (const auto& h : hk) bits += log2_det_identity_plus(h, eps, tol);
  return bits;
}

double capacity_postwhiten_fft(const ComplexMatrix& h_hat, std::size_t rx, double eps,
                               const NumericTolerances& tol) {
  if (eps < 0.0) throw std::invalid_argument("capacity: power must be >= 0");
  return log2_det_identity_plus(apply_block_dft(h_hat, rx), eps, tol);
}

double epsilon_for_snr(double snr_db, double noise_variance, double channel_gain) {
  if (!(noise_variance > 0.0)) throw std::invalid_argument("SNR calibration: noise variance must be > 0");
  if (!(channel_gain > 0.0)) throw std::invalid_argument("SNR calibration: channel gain must be > 0");
  return std::pow(10.0, snr_db / 10.0) * noise_variance / channel_gain;
}

std::vector<double> slot_capacities(std::span<const double> portion_bits, std::size_t division) {
  if (division == 0 || portion_bits.size() % division != 0) {
    throw std::invalid_argument("slot_capacities: portion count is not a multiple of the division");
  }
  std::vector<double> out(portion_bits.size() / division, 0.0);
  for (std::size_t p = 0; p < portion_bits.size(); ++p) out[p / division] += portion_bits[p];
  return out;
}

ClassSummary per_class_report(std::span<const double> slot_bits, std::span<const int> labels) {
  if (slot_bits.size() != labels.size()) {
    throw std::invalid_argument("per_class_report: " + std::to_string(slot_bits.size()) +
                                " slot capacities but " + std::to_string(labels.size()) +
                                " labels");
  }
  if (slot_bits.empty()) throw std::invalid_argument("per_class_report: no slots");
  ClassSummary out;
  std::array<double, 3> sums{};
  for (std::size_t s = 0; s < slot_bits.size(); ++s) {
    const int c = labels[s];
    if (c < 1 || c > 3) throw std::invalid_argument("per_class_report: class label out of range");
    sums[static_cast<std::size_t>(c - 1)] += slot_bits[s];
    ++out.members[static_cast<std::size_t>(c - 1)];
  }
  for (std::size_t c = 0; c < 3; ++c) {
    if (out.members[c] > 0) out.mean[c] = sums[c] / static_cast<double>(out.members[c]);
  }
  out.overall = std::accumulate(slot_bits.begin(), slot_bits.end(), 0.0) /
                static_cast<double>(slot_bits.size());
  return out;
}

}  // namespace plclab
