// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "plclab/channel.hpp"
#include "plclab/io.hpp"
#include "plclab/noise_analysis.hpp"
#include "plclab/whitening.hpp"
#include "support.hpp"

using namespace plclab;

namespace {

NoiseTrace white_trace(std::uint64_t seed, std::size_t spp, std::size_t n_periods,
                       std::size_t phases) {
  NoiseTrace t;
  t.samples_per_period = spp;
  t.n_periods = n_periods;
  t.sample_rate_hz = 1.0;
  for (std::size_t r = 0; r < phases; ++r) t.phases.push_back(gen_awgn(seed + r, spp * n_periods, 1.0));
  return t;
}

/// Draws z = L0 w for unit complex Gaussian w.
std::vector<cplx> correlated_draw(std::mt19937_64& rng, const ComplexMatrix& l0) {
  std::vector<cplx> w(l0.rows());
  for (auto& v : w) v = testing::cgauss(rng);
  return l0 * std::span<const cplx>(w);
}

}  // namespace

TEST_CASE("sample covariance") {
  CovarianceAccumulator acc(2);
  acc.add(std::vector<cplx>{1, cplx(0, 1)});
  acc.add(std::vector<cplx>{-1, cplx(0, -1)});
  const auto r = acc.covariance();
  CHECK(r(0, 0) == cplx(1.0));
  CHECK(r(1, 1) == cplx(1.0));
  CHECK(r(0, 1) == cplx(0, -1));
  CHECK(r(1, 0) == cplx(0, 1));
  CHECK(acc.count() == 2);

  CovarianceAccumulator shifted(1);
  shifted.add(std::vector<cplx>{3});
  shifted.add(std::vector<cplx>{5});
  CHECK(shifted.covariance(true)(0, 0) == cplx(1.0));
  CHECK(shifted.covariance(false)(0, 0) == cplx(17.0));
  CHECK(shifted.mean() == std::vector<cplx>{4.0});

  CHECK_THROWS_AS(CovarianceAccumulator(3).covariance(), std::invalid_argument);
  CHECK_THROWS_AS(acc.add(std::vector<cplx>{1}), std::invalid_argument);
}

TEST_CASE("estimate_autocorr on white noise approaches the identity") {
  const std::size_t dim = 2 * 32;
  const auto t = white_trace(3, 40, 10 * dim + 1, 2);
  const auto part = PortionPartition::make(40, 32, 8, 1);
  REQUIRE(part.portion_length * 2 == dim);
  const auto corr = estimate_autocorr(t, part, 0, 10 * dim);
  CHECK_FALSE(corr.rank_deficient);
  CHECK(corr.samples == 10 * dim);
  // Entrywise RMS error is about 1/sqrt(N_period).
  CHECK(frobenius_norm(corr.r - ComplexMatrix::identity(dim)) / double(dim) < 0.1);
  CHECK(relative_error(corr.r, ComplexMatrix::identity(dim)) < 0.45);

  CHECK_THROWS_AS(estimate_autocorr(t, part, 0, 10 * dim + 2), std::invalid_argument);
}

TEST_CASE("zero noise gives a zero estimate that cannot be whitened") {
  NoiseTrace t;
  t.samples_per_period = 40;
  t.n_periods = 50;
  t.phases.assign(1, std::vector<double>(2000, 0.0));
  const auto part = PortionPartition::make(40, 32, 8, 1);
  const auto corr = estimate_autocorr(t, part, 0, 50);
  CHECK(max_abs(corr.r) == 0.0);
  CHECK_THROWS_AS(make_whitener(corr), std::runtime_error);
}

TEST_CASE("perfectly correlated phases") {
  auto t = white_trace(5, 40, 30, 1);
  t.phases.push_back(t.phases[0]);
  const auto part = PortionPartition::make(40, 32, 8, 1);
  const auto corr = estimate_autocorr(t, part, 0, 30);
  for (std::size_t n = 0; n < part.portion_length; ++n) {
    CHECK(corr.r(2 * n, 2 * n + 1) == corr.r(2 * n, 2 * n));
    CHECK(corr.r(2 * n + 1, 2 * n + 1) == corr.r(2 * n, 2 * n));
  }
  CHECK(corr.rank_deficient);
  const auto w = make_whitener(corr);
  CHECK(w.loaded);
  CHECK(w.loading > 0.0);
}

TEST_CASE("whitener examples") {
  const auto id = make_whitener(ComplexMatrix::identity(3));
  CHECK(relative_error(id.lower, ComplexMatrix::identity(3)) == 0.0);
  const std::vector<cplx> z{1, cplx(2, 1), -3};
  CHECK(whiten_block(id, z) == z);

  const auto d = make_whitener(ComplexMatrix(2, 2, {4, 0, 0, 9}));
  const auto y = whiten_block(d, std::vector<cplx>{1, 1});
  CHECK(std::abs(y[0] - 0.5) < 1e-15);
  CHECK(std::abs(y[1] - 1.0 / 3.0) < 1e-15);

  const auto four = make_whitener(ComplexMatrix(1, 1, {4}));
  CHECK(whiten_block(four, std::vector<cplx>{2})[0] == cplx(1.0));
  CHECK_THROWS_AS(whiten_block(four, std::vector<cplx>{1, 2}), std::invalid_argument);
}

TEST_CASE("whitening with the true covariance yields unit covariance") {
  auto rng = testing::make_rng(6);
  const std::size_t dim = 4;
  const auto r0 = testing::random_pd(rng, dim, 0.2);
  const auto l0 = cholesky(r0).lower;
  const auto w = make_whitener(r0);
  CovarianceAccumulator acc(dim);
  for (int i = 0; i < 1'000'000; ++i) acc.add(whiten_block(w, correlated_draw(rng, l0)));
  const auto c = acc.covariance();
  CHECK(max_abs(c - ComplexMatrix::identity(dim)) < 0.02);
}

TEST_CASE("whitened sample covariance converges as the batch grows") {
  // The residual of an estimated whitener applied to the true covariance
  // decays like 1/sqrt(N_period); each 4x increase should roughly halve it.
  auto rng = testing::make_rng(7);
  const std::size_t dim = 8;
  const auto r0 = testing::random_pd(rng, dim, 0.5);
  const auto l0 = cholesky(r0).lower;

  std::vector<double> err;
  for (std::size_t n : {80u, 320u, 1280u}) {
    double sum = 0.0;
    const int trials = 40;
    for (int trial = 0; trial < trials; ++trial) {
      CovarianceAccumulator acc(dim);
      for (std::size_t i = 0; i < n; ++i) acc.add(correlated_draw(rng, l0));
      const auto w = make_whitener(acc.covariance());
      const auto a = solve_lower(w.lower, l0);  // L^-1 L0, so R_ww = a a^H
      sum += frobenius_norm(a * a.adjoint() - ComplexMatrix::identity(dim));
    }
    err.push_back(sum / trials);
  }
  CHECK(err[0] > err[1]);
  CHECK(err[1] > err[2]);
  for (std::size_t i = 0; i + 1 < err.size(); ++i) {
    const double ratio = err[i] / err[i + 1];
    CHECK(ratio > 1.6);
    CHECK(ratio < 2.5);
  }
}

TEST_CASE("relabeling phases permutes the autocorrelation blocks") {
  const auto bank = synth_filter_bank(8, 3, 4, 2, 0.7, 0.5, 40);
  const auto t = generate_fresh_trace(bank, 9, 120, 40, 1.0);
  auto swapped = t;
  std::swap(swapped.phases[0], swapped.phases[1]);
  const auto part = PortionPartition::make(40, 32, 8, 1);
  const auto a = estimate_autocorr(t, part, 0, 100);
  const auto b = estimate_autocorr(swapped, part, 0, 100);
  const std::size_t dim = a.r.rows();
  auto perm = [](std::size_t i) { return i ^ 1u; };  // swap phase index within each time step
  ComplexMatrix permuted(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) permuted(i, j) = a.r(perm(i), perm(j));
  }
  CHECK(frobenius_norm(permuted - b.r) <= 1e-12);
}

TEST_CASE("composite channel") {
  auto rng = testing::make_rng(10);
  const auto h = testing::random_matrix(rng, 4, 4);
  CHECK(relative_error(composite_channel(make_whitener(ComplexMatrix::identity(4)), h), h) == 0.0);

  MimoChannel flat(1, 1, 2);
  flat.at(0, 0, 0) = cplx(1, 2);
  flat.at(0, 0, 1) = 0.5;
  const auto circ = build_conv_matrix(flat, ConvKind::circulant, 4, 1);
  const std::vector<double> fours(4, 4.0);
  const auto halved = composite_channel(make_whitener(ComplexMatrix::diagonal(fours)), circ);
  CHECK(relative_error(halved, 0.5 * circ.matrix) < 1e-15);

  // Temporally correlated noise breaks the circulant structure.
  auto r = testing::random_pd(rng, 8, 1.0);
  const auto h_hat = composite_channel(make_whitener(r), build_conv_matrix(flat, ConvKind::circulant, 8, 1));
  CHECK_FALSE(is_block_circulant(h_hat, 1, 1, 1e-6));

  CHECK_THROWS_AS(composite_channel(make_whitener(ComplexMatrix::identity(3)), h), std::invalid_argument);
}

TEST_CASE("correlation CSV") {
  testing::TempDir dir("corr");
  PortionCorrelation c;
  c.portion = 3;
  c.r = ComplexMatrix(1, 1, {cplx(2, 0)});
  write_correlation(dir / "c.csv", std::span(&c, 1));
  CHECK(read_file(dir / "c.csv") == "portion,row,col,re,im\n3,0,0,2,0\n");
}
