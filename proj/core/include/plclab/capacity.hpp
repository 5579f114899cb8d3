// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "plclab/matrix.hpp"
#include "plclab/numerics.hpp"

namespace plclab {

/// Eigenvalues of H H^H (computed on the smaller Gram side), descending.
/// Values below 1e-12 * max are set to zero.
std::vector<double> eigen_channels(const ComplexMatrix& h, const NumericTolerances& tol = {});

/// sum_i log2(1 + eps * delta_i).
double capacity_from_eigs(std::span<const double> eigs, double eps);

/// Equal-power (no CSIT) capacity log2|I + eps H H^H| in bits, via eigenvalues.
double capacity_equal_power(const ComplexMatrix& h, double eps,
                            const NumericTolerances& tol = {});

/// Same quantity through a Cholesky log-determinant; used for cross-checks.
double capacity_logdet(const ComplexMatrix& h, double eps, const NumericTolerances& tol = {});

struct WaterfillResult {
  double mu = 0.0;             ///< water level; 0 when no power is spent
  std::vector<double> power;   ///< per eigenvalue, in the input order
  double bits = 0.0;
  std::size_t active = 0;
};

/// Optimal allocation power_i = max(0, mu - 1/delta_i) with sum power_i == total.
/// Eigenvalues below 1e-12 * max get no power.
WaterfillResult waterfill(std::span<const double> eigs, double total);

/// sum_k log2|I + eps H_k H_k^H| over per-subcarrier matrices.
double capacity_freq_nowhiten(std::span<const ComplexMatrix> hk, double eps,
                              const NumericTolerances& tol = {});

/// log2|I + eps (F H)(F H)^H| with the unitary block DFT F applied along the
/// time index of H's rows (blocks of `rx` rows).
double capacity_postwhiten_fft(const ComplexMatrix& h_hat, std::size_t rx, double eps,
                               const NumericTolerances& tol = {});

/// Per-time-instant transmit power that makes the average received SNR equal
/// snr_db: eps = snr * noise_variance / channel_gain.
double epsilon_for_snr(double snr_db, double noise_variance, double channel_gain);

/// Sum of each slot's portion capacities (portions are grouped `division` per slot).
std::vector<double> slot_capacities(std::span<const double> portion_bits, std::size_t division);

struct ClassSummary {
  std::array<std::optional<double>, 3> mean;  ///< classes 1..3; nullopt when empty
  std::array<std::size_t, 3> members{};
  double overall = 0.0;
};

ClassSummary per_class_report(std::span<const double> slot_bits, std::span<const int> labels);

}  // namespace plclab
