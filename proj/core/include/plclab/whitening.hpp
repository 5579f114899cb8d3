// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "plclab/channel.hpp"
#include "plclab/matrix.hpp"
#include "plclab/noise_analysis.hpp"
#include "plclab/noise_gen.hpp"
#include "plclab/numerics.hpp"

namespace plclab {

/// Streaming sample covariance (1/N) sum (z - mean)(z - mean)^H.
class CovarianceAccumulator {
 public:
  explicit CovarianceAccumulator(std::size_t dim);

  void add(std::span<const cplx> z);
  std::size_t count() const noexcept { return count_; }
  std::size_t dim() const noexcept { return dim_; }
  std::vector<cplx> mean() const;

  /// Hermitian-symmetrized estimate. With subtract_mean the sample mean is
  /// removed first; otherwise the raw second moment is returned.
  ComplexMatrix covariance(bool subtract_mean = true) const;

 private:
  std::size_t dim_;
  std::size_t count_ = 0;
  std::vector<cplx> sum_;
  ComplexMatrix outer_;  // upper triangle only
};

struct PortionCorrelation {
  std::size_t portion = 0;
  ComplexMatrix r;            ///< (M_r N_p) x (M_r N_p), time-major / phase-minor
  std::size_t samples = 0;    ///< periods averaged
  bool rank_deficient = false;  ///< fewer periods than dimensions
  double max_abs_mean = 0.0;    ///< largest sample mean entry removed before factoring
};

/// Payload samples (CP excluded) of one portion stacked across phases.
std::vector<cplx> portion_vector(const NoiseTrace& trace, const PortionPartition& partition,
                                 std::size_t portion, std::size_t period);

/// Per-portion autocorrelation over n_period usable periods, mean removed.
PortionCorrelation estimate_autocorr(const NoiseTrace& trace, const PortionPartition& partition,
                                     std::size_t portion, std::size_t n_period);

/// R^{-1/2} realized as the inverse of the lower Cholesky factor.
struct Whitener {
  ComplexMatrix lower;
  bool loaded = false;
  double loading = 0.0;

  std::size_t dim() const noexcept { return lower.rows(); }
};

Whitener make_whitener(const ComplexMatrix& r, const NumericTolerances& tol = {});

/// Rank-deficient estimates are loaded before factoring.
Whitener make_whitener(const PortionCorrelation& corr, const NumericTolerances& tol = {});

/// L^{-1} z by forward substitution.
std::vector<cplx> whiten_block(const Whitener& w, std::span<const cplx> block);

/// L^{-1} H, solved column by column.
ComplexMatrix composite_channel(const Whitener& w, const ComplexMatrix& h);
ComplexMatrix composite_channel(const Whitener& w, const BlockConvMatrix& h);

/// CSV `portion,row,col,re,im` of every entry.
void write_correlation(const std::filesystem::path& path,
                       std::span<const PortionCorrelation> correlations);

}  // namespace plclab
