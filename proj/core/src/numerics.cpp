// SPDX-License-Identifier: Apache-2.0
#include "plclab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace plclab {

namespace {

std::vector<cplx> fft_radix2(std::span<const cplx> x, bool inverse) {
  const std::size_t n = x.size();
  std::vector<cplx> a(x.begin(), x.end());

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  // Twiddles evaluated directly rather than by recurrence to keep round-off
  // at O(eps log N).
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<cplx> twiddle(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    twiddle[k] = std::polar(1.0, sign * 2.0 * std::numbers::pi * static_cast<double>(k) /
                                     static_cast<double>(n));
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const cplx u = a[start + k];
        const cplx v = a[start + k + half] * twiddle[k * stride];
        a[start + k] = u + v;
        a[start + k + half] = u - v;
      }
    }
  }
  return a;
}

std::vector<cplx> dft_direct(std::span<const cplx> x, bool inverse) {
  const std::size_t n = x.size();
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      // Reduce k*t mod n first so the angle stays small.
      const auto idx = static_cast<double>((k * t) % n);
      acc += x[t] * std::polar(1.0, sign * 2.0 * std::numbers::pi * idx / static_cast<double>(n));
    }
    out[k] = acc;
  }
  return out;
}

double mean_diagonal(const ComplexMatrix& r) {
  double acc = 0.0;
  for (std::size_t i = 0; i < r.rows(); ++i) acc += r(i, i).real();
  return acc / static_cast<double>(r.rows());
}

// Returns the index of the first failing pivot, or n on success.
std::size_t try_cholesky(const ComplexMatrix& r, double load, double floor, ComplexMatrix& l) {
  const std::size_t n = r.rows();
  l = ComplexMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    auto lj = l.row(j);
    double d = r(j, j).real() + load;
    for (std::size_t k = 0; k < j; ++k) d -= std::norm(lj[k]);
    if (!(d > floor)) return j;
    const double ljj = std::sqrt(d);
    lj[j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      auto li = l.row(i);
      cplx acc = r(i, j);
      for (std::size_t k = 0; k < j; ++k) acc -= li[k] * std::conj(lj[k]);
      li[j] = acc / ljj;
    }
  }
  return n;
}

void require_square(const ComplexMatrix& a, const char* who) {
  if (!a.is_square() || a.empty()) {
    throw std::invalid_argument(std::string(who) + ": expected a non-empty square matrix");
  }
}

}  // namespace

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

// Bluestein: rewrites the length-n DFT as a circular convolution of
// power-of-two length using chirp factors exp(sign*i*pi*k^2/n).
std::vector<cplx> dft_bluestein(std::span<const cplx> x, bool inverse) {
  const std::size_t n = x.size();
  const double sign = inverse ? 1.0 : -1.0;
  std::size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;

  std::vector<cplx> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto k2 = static_cast<double>((k * k) % (2 * n));
    chirp[k] = std::polar(1.0, sign * std::numbers::pi * k2 / static_cast<double>(n));
  }
  std::vector<cplx> a(m, 0.0);
  std::vector<cplx> b(m, 0.0);
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
  b[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);

  const auto fa = fft_radix2(a, false);
  const auto fb = fft_radix2(b, false);
  for (std::size_t i = 0; i < m; ++i) a[i] = fa[i] * fb[i];
  const auto conv = fft_radix2(a, true);
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = conv[k] * chirp[k] / static_cast<double>(m);
  return out;
}

std::vector<cplx> dft(std::span<const cplx> x, bool inverse) {
  if (x.empty()) throw std::invalid_argument("dft: empty sequence");
  std::vector<cplx> out;
  if (is_power_of_two(x.size())) {
    out = fft_radix2(x, inverse);
  } else if (x.size() <= 64) {
    out = dft_direct(x, inverse);
  } else {
    out = dft_bluestein(x, inverse);
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(x.size()));
  for (auto& v : out) v *= scale;
  return out;
}

bool is_hermitian(const ComplexMatrix& a, double rel_tol) {
  if (!a.is_square()) return false;
  const double scale = frobenius_norm(a);
  double dev = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = i; j < a.cols(); ++j) {
      dev += 2.0 * std::norm(a(i, j) - std::conj(a(j, i)));
    }
  }
  return std::sqrt(dev) <= rel_tol * scale;
}

CholeskyResult cholesky(const ComplexMatrix& r, const NumericTolerances& tol) {
  require_square(r, "cholesky");
  if (!is_hermitian(r, tol.hermitian)) {
    throw std::invalid_argument("cholesky: matrix is not Hermitian");
  }
  const double scale = mean_diagonal(r);
  const double floor = tol.pivot_floor * std::max(scale, 0.0);

  CholeskyResult result;
  if (try_cholesky(r, 0.0, floor, result.lower) == r.rows()) return result;

  result.loaded = true;
  result.loading = tol.loading * std::max(scale, 0.0);
  const std::size_t failed = try_cholesky(r, result.loading, floor, result.lower);
  if (failed != r.rows()) {
    throw std::runtime_error("cholesky: matrix not positive definite after diagonal loading "
                             "(pivot " + std::to_string(failed) + ")");
  }
  return result;
}

EigenResult eig_hermitian(const ComplexMatrix& input, const NumericTolerances& tol,
                          EigenOptions options) {
  require_square(input, "eig_hermitian");
  if (!is_hermitian(input, tol.hermitian)) {
    throw std::invalid_argument("eig_hermitian: matrix is not Hermitian");
  }
  const std::size_t n = input.rows();

  // Symmetrize exactly so the mirrored updates below stay consistent.
  ComplexMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = input(i, i).real();
    for (std::size_t j = 0; j < i; ++j) {
      const cplx v = 0.5 * (input(i, j) + std::conj(input(j, i)));
      a(i, j) = v;
      a(j, i) = std::conj(v);
    }
  }

  // vt holds eigenvectors as rows so each rotation touches contiguous memory.
  ComplexMatrix vt;
  if (options.vectors) vt = ComplexMatrix::identity(n);

  const double norm_a = frobenius_norm(a);
  const double stop = tol.jacobi * norm_a;
  const double skip = stop / static_cast<double>(std::max<std::size_t>(n, 1)) * 1e-3;

  auto off_norm = [&] {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      auto row = a.row(i);
      for (std::size_t j = i + 1; j < n; ++j) acc += 2.0 * std::norm(row[j]);
    }
    return std::sqrt(acc);
  };

  EigenResult result;
  constexpr int kMaxSweeps = 100;
  while (norm_a > 0.0 && off_norm() > stop) {
    if (result.sweeps == kMaxSweeps) {
      throw std::runtime_error("eig_hermitian: Jacobi iteration did not converge");
    }
    ++result.sweeps;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag <= skip) continue;
        const cplx phase = apq / mag;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double tau = (aqq - app) / (2.0 * mag);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const cplx se = s * phase;
        const cplx se_conj = std::conj(se);

        auto rp = a.row(p);
        auto rq = a.row(q);
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const cplx xp = rp[k];
          const cplx xq = rq[k];
          rp[k] = c * xp - se * xq;
          rq[k] = se_conj * xp + c * xq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          a(k, p) = std::conj(rp[k]);
          a(k, q) = std::conj(rq[k]);
        }
        a(p, p) = app - t * mag;
        a(q, q) = aqq + t * mag;
        a(p, q) = 0.0;
        a(q, p) = 0.0;

        if (options.vectors) {
          auto vp = vt.row(p);
          auto vq = vt.row(q);
          for (std::size_t k = 0; k < n; ++k) {
            const cplx xp = vp[k];
            const cplx xq = vq[k];
            vp[k] = c * xp - se_conj * xq;
            vq[k] = se * xp + c * xq;
          }
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a(i, i).real() > a(j, j).real();
  });

  result.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) result.values[i] = a(order[i], order[i]).real();

  if (options.clamp_psd) {
    const double top = std::max(std::abs(result.values.front()), std::abs(result.values.back()));
    for (auto& v : result.values) {
      if (v < 0.0 && v >= -tol.psd_clamp * top) v = 0.0;
    }
  }

  if (options.vectors) {
    result.vectors = ComplexMatrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      auto src = vt.row(order[i]);
      for (std::size_t k = 0; k < n; ++k) result.vectors(k, i) = src[k];
    }
  }
  return result;
}

double logdet_psd(const ComplexMatrix& a, const NumericTolerances& tol) {
  require_square(a, "logdet_psd");
  if (!is_hermitian(a, tol.hermitian)) {
    throw std::invalid_argument("logdet_psd: matrix is not Hermitian");
  }
  const double floor = tol.pivot_floor * std::max(mean_diagonal(a), 0.0);
  ComplexMatrix l;
  if (try_cholesky(a, 0.0, floor, l) != a.rows()) {
    throw std::domain_error("logdet_psd: singular matrix");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) acc += std::log(l(i, i).real());
  return 2.0 * acc;
}

std::vector<cplx> forward_substitute(const ComplexMatrix& lower, std::span<const cplx> b) {
  require_square(lower, "forward_substitute");
  if (b.size() != lower.rows()) {
    throw std::invalid_argument("forward_substitute: dimension mismatch (" +
                                std::to_string(b.size()) + " vs " +
                                std::to_string(lower.rows()) + ")");
  }
  std::vector<cplx> x(b.begin(), b.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto li = lower.row(i);
    cplx acc = x[i];
    for (std::size_t k = 0; k < i; ++k) acc -= li[k] * x[k];
    x[i] = acc / li[i];
  }
  return x;
}

ComplexMatrix solve_lower(const ComplexMatrix& lower, const ComplexMatrix& b) {
  require_square(lower, "solve_lower");
  if (b.rows() != lower.rows()) {
    throw std::invalid_argument("solve_lower: dimension mismatch (" +
                                std::to_string(b.rows()) + " vs " +
                                std::to_string(lower.rows()) + ")");
  }
  // Row-oriented forward substitution on all right-hand sides at once.
  ComplexMatrix x = b;
  const std::size_t n = lower.rows();
  for (std::size_t i = 0; i < n; ++i) {
    auto xi = x.row(i);
    auto li = lower.row(i);
    for (std::size_t k = 0; k < i; ++k) {
      const cplx lik = li[k];
      if (lik == cplx{}) continue;
      auto xk = x.row(k);
      for (std::size_t j = 0; j < x.cols(); ++j) xi[j] -= lik * xk[j];
    }
    const cplx inv = 1.0 / li[i];
    for (auto& v : xi) v *= inv;
  }
  return x;
}

ComplexMatrix invert_lower(const ComplexMatrix& lower) {
  return solve_lower(lower, ComplexMatrix::identity(lower.rows()));
}

}  // namespace plclab
