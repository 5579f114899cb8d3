// SPDX-License-Identifier: Apache-2.0
#include "plclab/whitening.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "plclab/io.hpp"

namespace plclab {

CovarianceAccumulator::CovarianceAccumulator(std::size_t dim)
    : dim_(dim), sum_(dim), outer_(dim, dim) {
  if (dim == 0) throw std::invalid_argument("covariance: dimension must be >= 1");
}

void CovarianceAccumulator::add(std::span<const cplx> z) {
  if (z.size() != dim_) throw std::invalid_argument("covariance: sample dimension mismatch");
  for (std::size_t a = 0; a < dim_; ++a) {
    sum_[a] += z[a];
    const cplx za = z[a];
    auto row = outer_.row(a);
    for (std::size_t b = a; b < dim_; ++b) row[b] += za * std::conj(z[b]);
  }
  ++count_;
}

std::vector<cplx> CovarianceAccumulator::mean() const {
  if (count_ == 0) throw std::invalid_argument("mean: no samples");
  std::vector<cplx> m(sum_);
  for (auto& v : m) v /= static_cast<double>(count_);
  return m;
}

ComplexMatrix CovarianceAccumulator::covariance(bool subtract_mean) const {
  if (count_ == 0) throw std::invalid_argument("covariance: no samples");
  const double n = static_cast<double>(count_);
  ComplexMatrix r(dim_, dim_);
  for (std::size_t a = 0; a < dim_; ++a) {
    for (std::size_t b = a; b < dim_; ++b) {
      cplx v = outer_(a, b) / n;
      if (subtract_mean) v -= (sum_[a] / n) * std::conj(sum_[b] / n);
      if (a == b) v = v.real();
      r(a, b) = v;
      r(b, a) = std::conj(v);
    }
  }
  return r;
}

std::vector<cplx> portion_vector(const NoiseTrace& trace, const PortionPartition& partition,
                                 std::size_t portion, std::size_t period) {
  const std::size_t m = trace.phase_count();
  const std::size_t n_p = partition.portion_length;
  const std::size_t offset = partition.payload_offset(portion);
  std::vector<cplx> z(m * n_p);
  for (std::size_t r = 0; r < m; ++r) {
    const auto seg = trace.segment(r, period, offset, n_p);
    for (std::size_t n = 0; n < n_p; ++n) z[n * m + r] = seg[n];
  }
  return z;
}

PortionCorrelation estimate_autocorr(const NoiseTrace& trace, const PortionPartition& partition,
                                     std::size_t portion, std::size_t n_period) {
  trace.validate();
  if (n_period == 0) throw std::invalid_argument("whitening: N_period must be >= 1");
  if (n_period > trace.usable_periods()) {
    throw std::invalid_argument("whitening: requested " + std::to_string(n_period) +
                                " periods but only " + std::to_string(trace.usable_periods()) +
                                " are usable");
  }
  const std::size_t dim = trace.phase_count() * partition.portion_length;
  CovarianceAccumulator acc(dim);
  const std::size_t first = trace.first_usable_period();
  for (std::size_t p = first; p < first + n_period; ++p) {
    acc.add(portion_vector(trace, partition, portion, p));
  }
  PortionCorrelation out;
  out.portion = portion;
  out.r = acc.covariance(true);
  out.samples = n_period;
  out.rank_deficient = n_period < dim;
  for (const auto& m : acc.mean()) out.max_abs_mean = std::max(out.max_abs_mean, std::abs(m));
  return out;
}

Whitener make_whitener(const ComplexMatrix& r, const NumericTolerances& tol) {
  auto chol = cholesky(r, tol);
  return Whitener{std::move(chol.lower), chol.loaded, chol.loading};
}

Whitener make_whitener(const PortionCorrelation& corr, const NumericTolerances& tol) {
  if (!corr.rank_deficient) return make_whitener(corr.r, tol);
  const double scale = corr.r.trace().real() / static_cast<double>(corr.r.rows());
  const double load = tol.loading * scale;
  ComplexMatrix loaded = corr.r;
  for (std::size_t i = 0; i < loaded.rows(); ++i) loaded(i, i) += load;
  auto w = make_whitener(loaded, tol);
  w.loaded = true;
  w.loading += load;
  return w;
}

std::vector<cplx> whiten_block(const Whitener& w, std::span<const cplx> block) {
  if (block.size() != w.dim()) {
    throw std::invalid_argument("whiten_block: block length " + std::to_string(block.size()) +
                                " != whitener dimension " + std::to_string(w.dim()));
  }
  return forward_substitute(w.lower, block);
}

ComplexMatrix composite_channel(const Whitener& w, const ComplexMatrix& h) {
  if (h.rows() != w.dim()) {
    throw std::invalid_argument("composite_channel: channel rows " + std::to_string(h.rows()) +
                                " != whitener dimension " + std::to_string(w.dim()));
  }
  return solve_lower(w.lower, h);
}

ComplexMatrix composite_channel(const Whitener& w, const BlockConvMatrix& h) {
  return composite_channel(w, h.matrix);
}

void write_correlation(const std::filesystem::path& path,
                       std::span<const PortionCorrelation> correlations) {
  std::string out = "portion,row,col,re,im\n";
  for (const auto& c : correlations) {
    const std::string prefix = std::to_string(c.portion) + ",";
    for (std::size_t i = 0; i < c.r.rows(); ++i) {
      for (std::size_t j = 0; j < c.r.cols(); ++j) {
        out += prefix + std::to_string(i) + "," + std::to_string(j) + "," +
               format_number(c.r(i, j).real()) + "," + format_number(c.r(i, j).imag()) + "\n";
      }
    }
  }
  write_file(path, out);
}

}  // namespace plclab
