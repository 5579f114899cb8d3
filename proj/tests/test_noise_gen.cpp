// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "plclab/noise_gen.hpp"
#include "support.hpp"

using namespace plclab;
using testing::make_rng;

namespace {

std::vector<cplx> complex_noise(std::uint64_t seed, std::size_t n) {
  auto rng = make_rng(seed);
  std::vector<cplx> w(n);
  for (auto& v : w) v = testing::cgauss(rng);
  return w;
}

double max_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

FreshFilterBank random_bank(std::mt19937_64& rng, std::size_t k, std::size_t taps,
                            std::size_t phases) {
  FreshFilterBank bank(k, phases, taps);
  for (std::size_t b = 0; b < k; ++b) {
    for (std::size_t r = 0; r < phases; ++r) {
      for (std::size_t c = 0; c < phases; ++c) {
        for (std::size_t l = 0; l < taps; ++l) bank.tap(b, r, c, l) = testing::cgauss(rng);
      }
    }
  }
  return bank;
}

}  // namespace

TEST_CASE("gen_awgn") {
  for (double v : gen_awgn(1, 100, 0.0)) CHECK(v == 0.0);
  CHECK(gen_awgn(7, 1000, 1.0) == gen_awgn(7, 1000, 1.0));
  CHECK(gen_awgn(7, 1000, 1.0) != gen_awgn(8, 1000, 1.0));
  CHECK_THROWS_AS(gen_awgn(1, 10, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(gen_awgn(1, 0, 1.0), std::invalid_argument);

  const auto x = gen_awgn(3, 1'000'000, 1.0);
  double s = 0.0;
  double ss = 0.0;
  for (double v : x) {
    s += v;
    ss += v * v;
  }
  const double mean = s / x.size();
  const double var = ss / x.size() - mean * mean;
  CHECK(var >= 0.99);
  CHECK(var <= 1.01);
}

TEST_CASE("samples per half mains cycle") {
  CHECK(samples_per_half_cycle(400e3, 62.5) == 3200);
  CHECK_THROWS_AS(samples_per_half_cycle(400e3, 60.0), std::invalid_argument);
}

TEST_CASE("fresh_siso examples") {
  const auto w = complex_noise(1, 32);

  FreshFilterBank identity(1, 1, 1);
  identity.tap(0, 0, 0, 0) = 1.0;
  CHECK(max_diff(fresh_siso(identity, w), w) == 0.0);

  FreshFilterBank two(2, 1, 1);
  two.tap(0, 0, 0, 0) = 1.0;
  two.tap(1, 0, 0, 0) = 1.0;
  const auto z = fresh_siso(two, w);
  for (std::size_t n = 0; n < w.size(); ++n) {
    const cplx want = w[n] * (1.0 + std::polar(1.0, -2.0 * std::numbers::pi * double(n) / 2.0));
    CHECK(std::abs(z[n] - want) < 1e-14 * (1.0 + std::abs(want)));
  }

  FreshFilterBank long_bank(1, 1, 40);
  CHECK_THROWS_AS(fresh_siso(long_bank, w), std::invalid_argument);
}

TEST_CASE("fresh_siso matches the brute-force LPTV double sum") {
  auto rng = make_rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 1 + rng() % 4;
    const std::size_t taps = 1 + rng() % 8;
    const std::size_t len = taps + rng() % (65 - taps);
    auto bank = random_bank(rng, k, taps, 1);
    const auto w = complex_noise(100 + trial, len);
    CHECK(max_diff(fresh_siso(bank, w), testing::lptv_oracle(bank, w)) <= 1e-10);
  }
}

TEST_CASE("fresh_siso honours a period longer than the branch count") {
  auto rng = make_rng(3);
  FreshFilterBank bank(3, 1, 4, 10);
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t l = 0; l < 4; ++l) bank.tap(k, 0, 0, l) = testing::cgauss(rng);
  }
  CHECK(bank.cyclic_frequency(2) == doctest::Approx(0.2));
  const auto w = complex_noise(4, 50);
  CHECK(max_diff(fresh_siso(bank, w), testing::lptv_oracle(bank, w)) <= 1e-10);
}

TEST_CASE("fresh_mimo examples") {
  auto rng = make_rng(5);
  const std::vector<std::vector<cplx>> streams{complex_noise(6, 40), complex_noise(7, 40)};

  SUBCASE("diagonal bank decouples into SISO filters") {
    auto bank = random_bank(rng, 3, 5, 2);
    for (std::size_t k = 0; k < 3; ++k) {
      for (std::size_t l = 0; l < 5; ++l) bank.tap(k, 0, 1, l) = bank.tap(k, 1, 0, l) = 0.0;
    }
    const auto z = fresh_mimo(bank, streams);
    for (std::size_t r = 0; r < 2; ++r) {
      FreshFilterBank siso(3, 1, 5);
      for (std::size_t k = 0; k < 3; ++k) {
        for (std::size_t l = 0; l < 5; ++l) siso.tap(k, 0, 0, l) = bank.tap(k, r, r, l);
      }
      CHECK(max_diff(z[r], fresh_siso(siso, streams[r])) < 1e-13);
    }
  }

  SUBCASE("zero bank gives a zero trace") {
    FreshFilterBank bank(2, 2, 3);
    for (const auto& phase : fresh_mimo(bank, streams)) {
      for (auto v : phase) CHECK(v == cplx(0.0));
    }
  }

  SUBCASE("pure cross coupling swaps the streams") {
    FreshFilterBank bank(1, 2, 1);
    bank.tap(0, 0, 1, 0) = 1.0;
    bank.tap(0, 1, 0, 0) = 1.0;
    const auto z = fresh_mimo(bank, streams);
    CHECK(max_diff(z[0], streams[1]) == 0.0);
    CHECK(max_diff(z[1], streams[0]) == 0.0);
  }

  SUBCASE("stream count mismatch") {
    FreshFilterBank bank(1, 2, 1);
    CHECK_THROWS_AS(fresh_mimo(bank, std::span(streams).first(1)), std::invalid_argument);
  }
}

TEST_CASE("synth_filter_bank") {
  const auto a = synth_filter_bank(9, 19, 65, 2, 0.9, 0.3);
  CHECK(a.branches() == 19);
  CHECK(a.taps() == 65);
  CHECK(a.filter_count() == 76);
  CHECK(a.filter(18, 1, 0).size() == 65);

  const auto b = synth_filter_bank(9, 19, 65, 2, 0.9, 0.3);
  for (std::size_t k = 0; k < 19; ++k) {
    for (std::size_t l = 0; l < 65; ++l) CHECK(a.tap(k, 0, 1, l) == b.tap(k, 0, 1, l));
  }

  const auto uncoupled = synth_filter_bank(9, 4, 8, 2, 0.8, 0.0);
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t l = 0; l < 8; ++l) {
      CHECK(uncoupled.tap(k, 0, 1, l) == cplx(0.0));
      CHECK(uncoupled.tap(k, 1, 0, l) == cplx(0.0));
    }
  }

  CHECK_THROWS_AS(synth_filter_bank(1, 4, 8, 2, 0.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(synth_filter_bank(1, 4, 8, 2, 0.5, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(synth_filter_bank(1, 0, 8, 2, 0.5, 0.5), std::invalid_argument);
}

TEST_CASE("FRESH traces are cyclostationary with the noise period") {
  // Ensemble variance per index over independent realizations: the profile of
  // every later period must repeat the first usable one.
  const std::size_t spp = 16;
  const std::size_t periods = 4;
  const std::size_t realizations = 50000;
  const auto bank = synth_filter_bank(21, 5, 4, 1, 0.7, 0.0, spp);
  std::vector<double> v(spp * periods);
  for (std::size_t i = 0; i < realizations; ++i) {
    const auto t = generate_fresh_trace(bank, 1000 + i, periods, spp, 1.0);
    if (i == 0) {
      CHECK(t.warmup == 3);
      CHECK(t.first_usable_period() == 1);
    }
    for (std::size_t n = 0; n < v.size(); ++n) v[n] += t.phases[0][n] * t.phases[0][n];
  }
  for (auto& x : v) x /= realizations;

  const double peak = *std::max_element(v.begin() + spp, v.end());
  double worst = 0.0;
  for (std::size_t n = 2 * spp; n < v.size(); ++n) worst = std::max(worst, std::abs(v[n] - v[spp + n % spp]));
  CHECK(worst <= 0.05 * peak);

  const auto [lo, hi] = std::minmax_element(v.begin() + spp, v.begin() + 2 * spp);
  CHECK(*hi - *lo > 0.1 * peak);  // the profile is not flat
}

TEST_CASE("cross filters induce spatial correlation") {
  auto correlation = [](double coupling, std::uint64_t seed) {
    const auto bank = synth_filter_bank(seed, 3, 4, 2, 0.7, coupling, 50);
    const auto t = generate_fresh_trace(bank, seed + 1, 400, 50, 1.0);
    double s01 = 0, s00 = 0, s11 = 0;
    for (std::size_t i = 50; i < t.phases[0].size(); ++i) {
      s01 += t.phases[0][i] * t.phases[1][i];
      s00 += t.phases[0][i] * t.phases[0][i];
      s11 += t.phases[1][i] * t.phases[1][i];
    }
    return std::pair{s01 / std::sqrt(s00 * s11), t.phases[0].size() - 50};
  };
  double coupled = 0.0;
  for (std::uint64_t s = 0; s < 8; ++s) coupled += std::abs(correlation(1.0, 100 + s).first);
  CHECK(coupled / 8 > 0.01);

  const auto [rho, count] = correlation(0.0, 7);
  CHECK(std::abs(rho) < 3.0 / std::sqrt(double(count)));
}

TEST_CASE("nassar_generate") {
  const auto w = gen_awgn(31, 4000, 1.0);

  NassarModel impulse{{{{1.0}, 100}}};
  auto t = nassar_generate(impulse, w, 40);
  CHECK(t.phases[0] == w);
  CHECK(t.warmup == 0);

  NassarModel scaled{{{{2.0}, 100}}};
  t = nassar_generate(scaled, w, 40);
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(t.phases[0][i] == 2.0 * w[i]);

  const auto long_w = gen_awgn(32, 200 * 100, 1.0);
  NassarModel tiers{{{{1.0}, 50}, {{3.0}, 50}}};
  t = nassar_generate(tiers, long_w, 200);
  double v0 = 0, v1 = 0;
  for (std::size_t p = 0; p < 200; ++p) {
    for (std::size_t i = 0; i < 50; ++i) {
      v0 += std::pow(t.phases[0][p * 100 + i], 2);
      v1 += std::pow(t.phases[0][p * 100 + 50 + i], 2);
    }
  }
  CHECK(v0 / 10000 == doctest::Approx(1.0).epsilon(0.05));
  CHECK(v1 / 10000 == doctest::Approx(9.0).epsilon(0.05));

  NassarModel two_tap{{{{1.0, 1.0}, 10}, {{1.0, 1.0}, 10}}};
  const auto reset = nassar_generate(two_tap, w, 2, RegionState::reset);
  const auto carry = nassar_generate(two_tap, w, 2, RegionState::carry);
  CHECK(reset.phases[0][10] == w[10]);
  CHECK(carry.phases[0][10] == w[10] + w[9]);
  CHECK(carry.warmup == 1);

  CHECK_THROWS_AS(nassar_generate(impulse, w, 41), std::invalid_argument);
}
