// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "plclab/capacity.hpp"
#include "plclab/channel.hpp"
#include "plclab/config.hpp"
#include "plclab/io.hpp"
#include "plclab/noise_analysis.hpp"
#include "plclab/pipeline.hpp"
#include "plclab/random.hpp"
#include "plclab/whitening.hpp"
#include "support.hpp"

using namespace plclab;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = PLCLAB_TEST_FIXTURES;
const fs::path kConfigs = PLCLAB_CONFIG_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Structural parameters of the full-scale setup.
Outcome parameter_fidelity() {
  PipelineConfig c;
  c.sample_rate_hz = 400e3;
  c.mains_hz = 62.5;
  c.n_fft = 256;
  c.n_cp = 64;
  c.channel_kind = ChannelKind::file;
  c.channel_path = kFixtures / "channel_2x2_L65.csv";
  c.channel_taps = 65;
  const auto plan = describe(c);
  const auto chan = make_channel(c);
  const auto bank = make_filter_bank(c);
  const bool ok = plan.samples_per_period == 3200 && plan.n_slots == 10 &&
                  slice_slots(3200, 256, 64).n_slots == 10 && chan.taps() == 65 &&
                  chan.rx() == 2 && validate(c).empty() && bank.branches() == 19 &&
                  bank.taps() == 65 && bank.filter_count() == 76;
  return {ok, "samples/period=" + std::to_string(plan.samples_per_period) +
                  " N_s=" + std::to_string(plan.n_slots) + " L=" + std::to_string(chan.taps()) +
                  " K=" + std::to_string(bank.branches()) +
                  " filter taps=" + std::to_string(bank.taps())};
}

// 2. FRESH filtering against the brute-force LPTV double sum.
Outcome fresh_correctness() {
  auto rng = testing::make_rng(2002);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 1 + rng() % 4;
    const std::size_t taps = 1 + rng() % 8;
    const std::size_t len = taps + rng() % (65 - taps);
    FreshFilterBank bank(k, 1, taps);
    for (std::size_t b = 0; b < k; ++b) {
      for (std::size_t l = 0; l < taps; ++l) bank.tap(b, 0, 0, l) = testing::cgauss(rng);
    }
    std::vector<cplx> w(len);
    for (auto& v : w) v = testing::cgauss(rng);
    const auto z = fresh_siso(bank, w);
    const auto ref = testing::lptv_oracle(bank, w);
    for (std::size_t i = 0; i < len; ++i) worst = std::max(worst, std::abs(z[i] - ref[i]));
  }
  return {worst <= 1e-10, "max |error| = " + fmt("%.3g", worst) + " over 50 cases"};
}

// 3. Whitening with the true and with an estimated covariance.
Outcome whitening_identity() {
  // Separable spatio-temporal model: 2 phases x 8 samples, time-major.
  const std::size_t phases = 2;
  const std::size_t n = 8;
  const std::size_t dim = phases * n;
  ComplexMatrix r0(dim, dim);
  const double rho_t = 0.8;
  const double rho_s = 0.5;
  for (std::size_t a = 0; a < dim; ++a) {
    for (std::size_t b = 0; b < dim; ++b) {
      const double t = std::pow(rho_t, std::abs(double(a / phases) - double(b / phases)));
      const double s = (a % phases == b % phases) ? 1.0 : rho_s;
      r0(a, b) = t * s;
    }
  }
  const auto l0 = cholesky(r0).lower;
  auto rng = testing::make_rng(3003);
  auto draw = [&] {
    std::vector<cplx> w(dim);
    for (auto& v : w) v = testing::gauss(rng);  // real-valued, like the noise traces
    return l0 * std::span<const cplx>(w);
  };
  auto empirical_residual = [&](const Whitener& wh) {
    CovarianceAccumulator acc(dim);
    for (int i = 0; i < 1'000'000; ++i) acc.add(whiten_block(wh, draw()));
    return frobenius_norm(acc.covariance(false) - ComplexMatrix::identity(dim)) / 4.0;
  };

  const double exact = empirical_residual(make_whitener(r0));

  const std::size_t n_period = 20 * dim;
  CovarianceAccumulator est(dim);
  for (std::size_t i = 0; i < n_period; ++i) est.add(draw());
  PortionCorrelation corr;
  corr.r = est.covariance(true);
  corr.samples = n_period;
  corr.rank_deficient = n_period < dim;
  const auto wh = make_whitener(corr);
  const double estimated = empirical_residual(wh);
  const auto m = solve_lower(wh.lower, l0);
  const double population = frobenius_norm(m * m.adjoint() - ComplexMatrix::identity(dim)) / 4.0;

  return {exact <= 0.02 && estimated <= 0.15,
          "true R: " + fmt("%.4f", exact) + " (<= 0.02); estimated R at N_period=" +
              std::to_string(n_period) + ": " + fmt("%.4f", estimated) + " (<= 0.15; population " +
              fmt("%.4f", population) + ")"};
}

// 4. Frequency-domain capacity equals time-domain circulant capacity.
Outcome time_frequency_equivalence() {
  auto rng = testing::make_rng(4004);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = trial % 2 ? 2 : 1;
    const std::size_t taps = 1 + rng() % 5;
    const std::size_t n_p = taps + rng() % (17 - taps);
    MimoChannel c(m, m, taps);
    for (std::size_t l = 0; l < taps; ++l) {
      for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t t = 0; t < m; ++t) c.at(r, t, l) = testing::cgauss(rng);
      }
    }
    const auto circ = build_conv_matrix(c, ConvKind::circulant, n_p, taps - 1);
    const double eps = std::pow(10.0, (testing::uniform(rng) * 50.0 - 10.0) / 10.0);
    const double f = capacity_freq_nowhiten(fft_diagonalize(circ), eps);
    const double t = capacity_equal_power(circ.matrix, eps);
    worst = std::max(worst, std::abs(f - t));
  }
  return {worst <= 1e-8, "max |C_freq - C_time| = " + fmt("%.3g", worst) + " bits over 100 channels"};
}

// 5. Waterfilling: closed-form two-channel case and random feasible allocations.
Outcome waterfilling() {
  const std::vector<double> two{4.0, 1.0};
  const auto w = waterfill(two, 1.0);
  const double closed = std::log2(4.5) + std::log2(1.125);
  bool ok = std::abs(w.bits - closed) <= 1e-6 && std::abs(w.bits - 2.3399) <= 5e-5;

  auto rng = testing::make_rng(5005);
  double worst_gap = 1e300;
  for (int set = 0; set < 50; ++set) {
    const std::size_t n = 1 + rng() % 8;
    std::vector<double> eigs(n);
    for (auto& d : eigs) d = std::exp(6.0 * (testing::uniform(rng) - 0.5));
    const double total = 0.01 + 10.0 * testing::uniform(rng);
    const auto opt = waterfill(eigs, total);
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<double> p(n);
      double s = 0.0;
      for (auto& v : p) s += (v = -std::log(1.0 - testing::uniform(rng)));
      double b = 0.0;
      for (std::size_t i = 0; i < n; ++i) b += std::log2(1.0 + p[i] * total / s * eigs[i]);
      worst_gap = std::min(worst_gap, opt.bits - b);
    }
  }
  ok = ok && worst_gap >= -1e-12;
  return {ok, "C = " + fmt("%.7f", w.bits) + " bits (closed form " + fmt("%.7f", closed) +
                  "); min margin over 50x1000 allocations " + fmt("%.3g", worst_gap)};
}

// 6. KLD estimator calibration and the Gaussianity search on AWGN.
Outcome kld_calibration() {
  const auto a = gen_awgn(6006, 1'000'000, 1.0);
  double mean = std::accumulate(a.begin(), a.end(), 0.0) / a.size();
  double var = 0.0;
  for (double v : a) var += (v - mean) * (v - mean);
  var /= a.size();
  const double fitted = kld_vs_gaussian(histogram(a, 64), mean, var);
  const double forced = kld_vs_gaussian(histogram(a, 64), 0.0, 2.0);
  const double closed = testing::gaussian_kld(1.0, 2.0);

  NoiseTrace t;
  t.samples_per_period = 3200;
  t.n_periods = 20;
  t.sample_rate_hz = 400e3;
  t.phases = {gen_awgn(6007, 64000, 1.0), gen_awgn(6008, 64000, 1.0)};
  GaussianityOptions opts;
  opts.threshold = 0.4;
  opts.iterations = 1000;
  opts.n_period = 20;
  opts.bins = 64;
  opts.seed = 6009;
  const auto search = gaussianity_search(t, 256, 64, opts);

  const bool ok = fitted < 0.01 && std::abs(forced - 0.0966) <= 0.005 &&
                  search.partition.division == 1 && search.partition.portion_length == 256;
  return {ok, "fitted " + fmt("%.5f", fitted) + " nats; N(0,1) vs N(0,2) " + fmt("%.5f", forced) +
                  " (closed form " + fmt("%.5f", closed) + "); AWGN search A=" +
                  std::to_string(search.partition.division)};
}

// 7. Class ordering on a three-tier fixture, and CSIT dominance.
Outcome class_ordering() {
  // Ten slots in three variance tiers, two phases, fixed thresholds.
  const std::vector<double> sigmas{1, 1, 1, 1, 2, 2, 2, 4, 4, 4};
  const std::size_t n_fft = 32;
  const std::size_t n_cp = 8;
  const auto trace = testing::tiered_trace(sigmas, n_fft + n_cp, 200, 2, 7007);
  const double th1 = 0.5;
  const double th2 = 2.0;
  const auto cls = classify_slots(trace, n_fft, n_cp, th1, th2, 20);
  const std::vector<int> want{1, 1, 1, 1, 2, 2, 2, 3, 3, 3};
  bool ok = cls.labels == want;

  const auto chan = synth_channel(7008, 2, 2, 9, 0.7);
  const auto part = PortionPartition::make(trace.samples_per_period, n_fft, n_cp, 1);
  const std::size_t n = trace.usable_periods();
  const auto eig = compute_eigen(trace, part, chan, n, true, false);
  const auto cal = calibrate(trace, part, chan, n);
  PipelineConfig c;
  c.snr_db = {10, 15, 20, 25, 30, 35, 40};
  const auto sweep = capacity_sweep(eig, cal, cls.labels, c);

  auto value = [&](double snr, const std::string& mode, std::size_t cls_id) {
    for (const auto& r : sweep.rows) {
      if (r.snr_db == snr && r.mode == mode && r.scope == "class" && r.scope_id == cls_id) return r.bits;
    }
    return std::nan("");
  };
  double worst_order = 1e300;
  double worst_csit = 1e300;
  for (double snr : c.snr_db) {
    for (const char* mode : {"csit", "no-csit"}) {
      const double c1 = value(snr, mode, 1), c2 = value(snr, mode, 2), c3 = value(snr, mode, 3);
      worst_order = std::min({worst_order, c1 - c2, c2 - c3});
    }
    for (const auto& r : sweep.rows) {
      if (r.snr_db != snr || r.mode != "csit") continue;
      for (const auto& q : sweep.rows) {
        if (q.snr_db == snr && q.mode == "no-csit" && q.scope == r.scope && q.scope_id == r.scope_id) {
          worst_csit = std::min(worst_csit, r.bits - q.bits);
        }
      }
    }
  }
  ok = ok && worst_order > 0.0 && worst_csit >= -1e-9;
  return {ok, "labels " + std::string(cls.labels == want ? "as built" : "MISMATCH") +
                  " (th1=0.5, th2=2); min class gap " + fmt("%.3f", worst_order) +
                  " bits; min CSIT - no-CSIT " + fmt("%.3g", worst_csit) + " bits"};
}

// 8. MIMO gain on i.i.d. flat channels at 30 dB.
Outcome mimo_gain() {
  GaussianSource src(8008);
  const double rho = 1000.0;
  auto ch = [&] { return cplx(src.normal(), src.normal()) / std::sqrt(2.0); };
  double mimo = 0.0;
  double siso = 0.0;
  for (int draw = 0; draw < 200; ++draw) {
    const ComplexMatrix h(2, 2, {ch(), ch(), ch(), ch()});
    mimo += capacity_equal_power(h, rho / 2.0);
    siso += 0.5 * (std::log2(1.0 + rho * std::norm(h(0, 0))) + std::log2(1.0 + rho * std::norm(h(1, 1))));
  }
  const double ratio = mimo / siso;
  return {ratio >= 1.8, "mean 2x2 " + fmt("%.3f", mimo / 200) + " vs SISO " + fmt("%.3f", siso / 200) +
                            " bits/use, ratio " + fmt("%.3f", ratio)};
}

// 9. Two full runs produce byte-identical CSVs.
Outcome determinism() {
  auto config = load_config(kConfigs / "desk.conf");
  testing::TempDir a("accept-a");
  testing::TempDir b("accept-b");

  config.output_dir = a.path();
  auto t0 = std::chrono::steady_clock::now();
  run_pipeline(config);
  const double single = seconds_since(t0);

  config.output_dir = b.path();
  t0 = std::chrono::steady_clock::now();
  run_pipeline(config);
  std::size_t files = 0;
  std::size_t differing = 0;
  for (const auto& entry : fs::directory_iterator(a.path())) {
    if (entry.path().extension() != ".csv") continue;
    ++files;
    const auto other = b.path() / entry.path().filename();
    if (!fs::exists(other) || read_file(entry.path()) != read_file(other)) ++differing;
  }
  const double check = seconds_since(t0);
  const bool ok = files > 0 && differing == 0 && check < 2.0 * single;
  return {ok, std::to_string(files) + " CSVs, " + std::to_string(differing) +
                  " differing; single run " + fmt("%.2f", single) + " s, repeat+compare " +
                  fmt("%.2f", check) + " s"};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "parameter fidelity", 1.0, parameter_fidelity},
      {2, "FRESH correctness", 5.0, fresh_correctness},
      {3, "whitening identity", 30.0, whitening_identity},
      {4, "time/frequency capacity equivalence", 10.0, time_frequency_equivalence},
      {5, "waterfilling optimality", 5.0, waterfilling},
      {6, "KLD calibration", 30.0, kld_calibration},
      {7, "class ordering", 60.0, class_ordering},
      {8, "MIMO gain", 30.0, mimo_gain},
      {9, "determinism", 0.0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = seconds_since(t0);
    // Criterion 9 carries its own relative time bound.
    const bool in_time = c.budget_s <= 0.0 || elapsed < c.budget_s;
    const bool pass = out.pass && in_time;
    failures += !pass;
    std::printf("%s %d %s: %s [%.2f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                out.detail.c_str(), elapsed,
                in_time ? "" : (", budget " + fmt("%.0f", c.budget_s) + " s exceeded").c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
