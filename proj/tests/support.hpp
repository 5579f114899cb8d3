// SPDX-License-Identifier: Apache-2.0
// Test-only reference implementations and fixtures. Everything here is
// written for clarity over speed and shares no code with the library kernels.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "plclab/matrix.hpp"
#include "plclab/noise_gen.hpp"

namespace testing {

using plclab::ComplexMatrix;
using plclab::cplx;

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("plclab-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double gauss(std::mt19937_64& rng) {
  // Box-Muller on raw engine output keeps fixtures identical across standard libraries.
  const double u1 = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline cplx cgauss(std::mt19937_64& rng) {
  const double re = gauss(rng);
  const double im = gauss(rng);
  return cplx(re, im) / std::sqrt(2.0);
}

inline double uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline ComplexMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  ComplexMatrix m(rows, cols);
  for (auto& v : m.data()) v = cgauss(rng);
  return m;
}

/// A A^H + shift * I, computed by the naive triple loop.
inline ComplexMatrix random_pd(std::mt19937_64& rng, std::size_t n, double shift = 0.1) {
  const auto a = random_matrix(rng, n, n);
  ComplexMatrix r(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cplx s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += a(i, k) * std::conj(a(j, k));
      r(i, j) = s;
    }
    r(i, i) += shift;
  }
  return r;
}

inline ComplexMatrix naive_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      cplx s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  }
  return c;
}

/// Unitary DFT by the defining sum, evaluated in long double.
inline std::vector<cplx> direct_dft(const std::vector<cplx>& x, bool inverse = false) {
  const std::size_t n = x.size();
  std::vector<cplx> out(n);
  const long double sign = inverse ? 1.0L : -1.0L;
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<long double> acc = 0.0L;
    for (std::size_t t = 0; t < n; ++t) {
      const long double ang = sign * 2.0L * std::numbers::pi_v<long double> *
                              static_cast<long double>((k * t) % n) / static_cast<long double>(n);
      acc += std::complex<long double>(x[t].real(), x[t].imag()) *
             std::complex<long double>(std::cos(ang), std::sin(ang));
    }
    acc /= std::sqrt(static_cast<long double>(n));
    out[k] = cplx(static_cast<double>(acc.real()), static_cast<double>(acc.imag()));
  }
  return out;
}

/// Brute-force LPTV evaluation: builds g[n, l] = sum_k g_k[n - l] exp(-j 2 pi alpha_k l)
/// and sums z[n] = sum_l g[n, l] w[l] over the full input history.
inline std::vector<cplx> lptv_oracle(const plclab::FreshFilterBank& bank,
                                     const std::vector<cplx>& w) {
  const std::size_t n_out = w.size();
  std::vector<cplx> z(n_out);
  for (std::size_t n = 0; n < n_out; ++n) {
    for (std::size_t l = 0; l <= n; ++l) {
      cplx g = 0.0;
      for (std::size_t k = 0; k < bank.branches(); ++k) {
        const std::size_t lag = n - l;
        if (lag >= bank.taps()) continue;
        const double alpha = static_cast<double>(k) / static_cast<double>(bank.period());
        g += bank.tap(k, 0, 0, lag) *
             std::polar(1.0, -2.0 * std::numbers::pi * alpha * static_cast<double>(l));
      }
      z[n] += g * w[l];
    }
  }
  return z;
}

/// Circular convolution of two equal-length sequences by definition.
inline std::vector<cplx> circular_convolve(const std::vector<cplx>& h, const std::vector<cplx>& x) {
  const std::size_t n = x.size();
  std::vector<cplx> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < h.size(); ++k) y[i] += h[k] * x[(i + n * h.size() - k) % n];
  }
  return y;
}

/// Gaussian mass of [a, b] by composite Simpson integration of the density.
inline double simpson_normal_mass(double a, double b, double mean, double var, int panels = 400) {
  const double sd = std::sqrt(var);
  auto pdf = [&](double x) {
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
  };
  const double h = (b - a) / panels;
  double s = pdf(a) + pdf(b);
  for (int i = 1; i < panels; ++i) s += pdf(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

/// D(N(0, v1) || N(0, v2)) in nats.
inline double gaussian_kld(double v1, double v2) {
  return 0.5 * (std::log(v2 / v1) + v1 / v2 - 1.0);
}

/// Best two-channel allocation on a uniform power grid.
inline double grid_waterfill_two(double d1, double d2, double total, double step) {
  double best = 0.0;
  for (double p = 0.0; p <= total + 1e-15; p += step) {
    const double q = std::max(total - p, 0.0);
    best = std::max(best, std::log2(1.0 + p * d1) + std::log2(1.0 + q * d2));
  }
  return best;
}

/// Three-tier single-phase fixture: slot s has standard deviation sigmas[s]
/// (i.i.d. Gaussian within the slot) in every period.
inline plclab::NoiseTrace tiered_trace(const std::vector<double>& sigmas, std::size_t slot_length,
                                       std::size_t n_periods, std::size_t phases,
                                       std::uint64_t seed) {
  plclab::NoiseTrace t;
  t.samples_per_period = sigmas.size() * slot_length;
  t.n_periods = n_periods;
  t.sample_rate_hz = 400e3;
  auto rng = make_rng(seed);
  t.phases.assign(phases, std::vector<double>(n_periods * t.samples_per_period));
  for (std::size_t r = 0; r < phases; ++r) {
    for (std::size_t i = 0; i < t.phases[r].size(); ++i) {
      const std::size_t slot = (i % t.samples_per_period) / slot_length;
      t.phases[r][i] = sigmas[slot] * gauss(rng);
    }
  }
  return t;
}

}  // namespace testing
