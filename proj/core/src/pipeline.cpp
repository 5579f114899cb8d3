// SPDX-License-Identifier: Apache-2.0
#include "plclab/pipeline.hpp"

#include <algorithm>
#include <array>
#include <tuple>
#include <cmath>
#include <map>
#include <ostream>
#include <string>

#include "plclab/capacity.hpp"
#include "plclab/io.hpp"
#include "plclab/parallel.hpp"
#include "plclab/random.hpp"
#include "plclab/svg_plot.hpp"
#include "plclab/trace_io.hpp"
#include "plclab/whitening.hpp"

namespace plclab {

namespace fs = std::filesystem;

StageError::StageError(std::string stage, const std::string& message)
    : std::runtime_error(stage + ": " + message), stage_(std::move(stage)) {}

namespace {

template <typename F>
auto in_stage(const std::string& stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

void note(std::ostream* log, const std::string& stage, const std::string& msg) {
  if (log) *log << "[" << stage << "] " << msg << '\n';
}

fs::path require_artifact(const PipelineConfig& config, const char* name, const std::string& stage,
                          const char* producer) {
  const fs::path p = config.output_dir / name;
  if (!fs::exists(p)) {
    throw StageError(stage, "missing artifact '" + p.string() + "' (run '" + producer +
                                "' first)");
  }
  return p;
}

NoiseTrace load_trace_artifact(const PipelineConfig& config, const std::string& stage) {
  const auto csv = require_artifact(config, artifact::trace, stage, "generate");
  const auto meta = require_artifact(config, artifact::trace_meta, stage, "generate");
  return in_stage(stage, [&] { return read_trace(csv, meta); });
}

MimoChannel load_channel_artifact(const PipelineConfig& config, const std::string& stage) {
  const auto path = require_artifact(config, artifact::channel, stage, "generate");
  return in_stage(stage, [&] { return load_channel(path); });
}

std::size_t get_count(const KeyValues& kv, const std::string& key, const fs::path& path) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw std::runtime_error(path.string() + ": missing key '" + key + "'");
  return parse_count(it->second);
}

double get_number(const KeyValues& kv, const std::string& key, const fs::path& path) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw std::runtime_error(path.string() + ": missing key '" + key + "'");
  return parse_number(it->second);
}

PortionPartition load_partition_artifact(const PipelineConfig& config, const std::string& stage) {
  const auto path = require_artifact(config, artifact::partition, stage, "gaussianity");
  return in_stage(stage, [&] {
    const auto kv = read_key_values(path);
    auto p = PortionPartition::make(get_count(kv, "samples_per_period", path),
                                    get_count(kv, "n_fft", path), get_count(kv, "n_cp", path),
                                    get_count(kv, "division", path));
    p.gaussian = get_count(kv, "gaussian", path) != 0;
    return p;
  });
}

std::vector<int> load_labels_artifact(const PipelineConfig& config, const std::string& stage) {
  const auto path = require_artifact(config, artifact::classification, stage, "classify");
  return in_stage(stage, [&] {
    CsvReader reader(path, "slot,sigma,D,class");
    std::vector<int> labels;
    std::vector<std::string_view> f;
    while (reader.next(f)) {
      if (f.size() != 4) reader.fail("expected 4 fields");
      if (parse_count(f[0]) != labels.size()) reader.fail("slots out of order");
      labels.push_back(static_cast<int>(parse_count(f[3])));
    }
    return labels;
  });
}

std::size_t whitening_periods(const PipelineConfig& config, const NoiseTrace& trace) {
  const std::size_t usable = trace.usable_periods();
  if (config.whiten_n_period == 0) return usable;
  if (config.whiten_n_period > usable) {
    throw std::invalid_argument("whiten.n_period exceeds the " + std::to_string(usable) +
                                " usable periods");
  }
  return config.whiten_n_period;
}

NassarModel make_nassar_model(const PipelineConfig& config) {
  NassarModel model;
  double energy = 0.0;
  for (std::size_t l = 0; l < config.nassar_taps; ++l) {
    energy += std::pow(config.nassar_decay, 2.0 * static_cast<double>(l));
  }
  for (std::size_t i = 0; i < config.nassar_gains.size(); ++i) {
    NassarRegion region;
    region.length = config.nassar_lengths.at(i);
    for (std::size_t l = 0; l < config.nassar_taps; ++l) {
      region.taps.push_back(config.nassar_gains[i] *
                            std::pow(config.nassar_decay, static_cast<double>(l)) /
                            std::sqrt(energy));
    }
    model.regions.push_back(std::move(region));
  }
  return model;
}

std::string bool_str(bool b) { return b ? "1" : "0"; }

}  // namespace

FreshFilterBank make_filter_bank(const PipelineConfig& config) {
  const std::size_t spp = effective_samples_per_period(config);
  return synth_filter_bank(derive_seed(config.seed, "noise.bank"), config.fresh_branches,
                           config.fresh_taps, config.phases, config.fresh_decay,
                           config.fresh_coupling, config.fresh_period ? config.fresh_period : spp);
}

NoiseTrace make_noise(const PipelineConfig& config) {
  switch (config.noise_kind) {
    case NoiseKind::fresh:
      return generate_fresh_trace(make_filter_bank(config),
                                  derive_seed(config.seed, "noise.excitation"), config.n_periods,
                                  effective_samples_per_period(config), config.sample_rate_hz);
    case NoiseKind::nassar: {
      const auto model = make_nassar_model(config);
      const std::size_t spp = model.samples_per_period();
      NoiseTrace trace;
      for (std::size_t r = 0; r < config.phases; ++r) {
        const auto w = gen_awgn(derive_seed(derive_seed(config.seed, "noise.excitation"), r),
                                config.n_periods * spp, 1.0);
        auto phase = nassar_generate(model, w, config.n_periods, config.nassar_state);
        if (r == 0) trace = std::move(phase);
        else trace.phases.push_back(std::move(phase.phases.front()));
      }
      trace.sample_rate_hz = config.sample_rate_hz;
      trace.validate();
      return trace;
    }
    case NoiseKind::file: {
      auto trace = read_trace(config.noise_trace, config.noise_meta);
      trace.validate();
      if (trace.phase_count() != config.phases) {
        throw std::invalid_argument("trace has " + std::to_string(trace.phase_count()) +
                                    " phases, noise.phases is " + std::to_string(config.phases));
      }
      return trace;
    }
  }
  throw std::logic_error("unknown noise kind");
}

MimoChannel make_channel(const PipelineConfig& config) {
  if (config.channel_kind == ChannelKind::file) {
    auto chan = load_channel(config.channel_path, config.channel_taps
                                                      ? std::optional(config.channel_taps)
                                                      : std::nullopt);
    if (chan.rx() != config.phases || chan.tx() != config.phases) {
      throw std::invalid_argument("channel is " + std::to_string(chan.rx()) + "x" +
                                  std::to_string(chan.tx()) + " but noise.phases is " +
                                  std::to_string(config.phases));
    }
    return chan;
  }
  return synth_channel(derive_seed(config.seed, "channel"), config.phases, config.phases,
                       config.channel_taps, config.channel_decay);
}

PlanSummary describe(const PipelineConfig& config) {
  PlanSummary plan;
  plan.sample_rate_hz = config.sample_rate_hz;
  plan.samples_per_period =
      in_stage("noise", [&] { return effective_samples_per_period(config); });
  const auto slots =
      in_stage("frame", [&] { return slice_slots(plan.samples_per_period, config.n_fft, config.n_cp); });
  plan.n_slots = slots.n_slots;
  plan.slot_length = slots.slot_length;
  plan.max_division = PortionPartition::max_division(config.n_fft, config.n_cp);

  const auto chan = in_stage(config.channel_kind == ChannelKind::file ? "channel.load" : "channel",
                             [&] { return make_channel(config); });
  if (config.n_cp + 1 < chan.taps()) throw StageError("channel", "insufficient cyclic prefix");
  plan.channel_rx = chan.rx();
  plan.channel_tx = chan.tx();
  plan.channel_taps = chan.taps();

  if (config.noise_kind == NoiseKind::fresh) {
    const auto bank = in_stage("noise.generate", [&] { return make_filter_bank(config); });
    plan.bank_branches = bank.branches();
    plan.bank_taps = bank.taps();
    plan.bank_filters = bank.filter_count();
  }
  return plan;
}

Calibration calibrate(const NoiseTrace& trace, const PortionPartition& partition,
                      const MimoChannel& chan, std::size_t n_period) {
  if (n_period < 2 || n_period > trace.usable_periods()) {
    throw std::invalid_argument("calibration needs between 2 and " +
                                std::to_string(trace.usable_periods()) + " periods");
  }
  const std::size_t spp = trace.samples_per_period;
  const std::size_t first = trace.first_usable_period();
  double total = 0.0;
  for (std::size_t r = 0; r < trace.phase_count(); ++r) {
    for (std::size_t n = 0; n < spp; ++n) {
      double sum = 0.0;
      for (std::size_t p = first; p < first + n_period; ++p) sum += trace.phases[r][p * spp + n];
      const double mean = sum / static_cast<double>(n_period);
      double ss = 0.0;
      for (std::size_t p = first; p < first + n_period; ++p) {
        const double d = trace.phases[r][p * spp + n] - mean;
        ss += d * d;
      }
      total += ss / static_cast<double>(n_period);
    }
  }
  Calibration cal;
  cal.noise_variance = total / static_cast<double>(spp * trace.phase_count());
  cal.channel_gain = chan.mean_gain();
  cal.sample_rate_hz = trace.sample_rate_hz;
  cal.rx = chan.rx();
  cal.tx = chan.tx();
  cal.n_p = partition.portion_length;
  cal.n_cp = partition.n_cp;
  cal.division = partition.division;
  cal.n_slots = partition.n_slots;
  return cal;
}

EigenTable compute_eigen(const NoiseTrace& trace, const PortionPartition& partition,
                         const MimoChannel& chan, std::size_t n_period, bool time,
                         bool frequency) {
  if (chan.rx() != trace.phase_count()) {
    throw std::invalid_argument("channel receive antennas differ from the noise phase count");
  }
  if (partition.n_cp + 1 < chan.taps()) throw std::invalid_argument("insufficient cyclic prefix");
  const auto h = build_conv_matrix(chan, ConvKind::circulant, partition.portion_length,
                                   partition.n_cp);
  const std::size_t n = partition.portion_count();
  EigenTable table;
  if (time) table.time.resize(n);
  if (frequency) table.frequency.resize(n);
  parallel_for(n, [&](std::size_t p) {
    const auto corr = estimate_autocorr(trace, partition, p, n_period);
    const auto w = make_whitener(corr);
    const auto h_hat = composite_channel(w, h);
    if (time) table.time[p] = eigen_channels(h_hat);
    if (frequency) table.frequency[p] = eigen_channels(apply_block_dft(h_hat, chan.rx()));
  });
  return table;
}

SweepResult capacity_sweep(const EigenTable& eigen, const Calibration& cal,
                           std::span<const int> labels, const PipelineConfig& config) {
  if (labels.size() != cal.n_slots) {
    throw std::invalid_argument("classification has " + std::to_string(labels.size()) +
                                " slots, partition has " + std::to_string(cal.n_slots));
  }
  struct Domain {
    const char* name;
    const std::vector<std::vector<double>>* eigs;
  };
  std::vector<Domain> domains;
  if (config.domain_time && !eigen.time.empty()) domains.push_back({"time", &eigen.time});
  if (config.domain_frequency && !eigen.frequency.empty()) {
    domains.push_back({"frequency", &eigen.frequency});
  }
  if (domains.empty()) throw std::invalid_argument("no eigenvalues for the selected domains");
  for (const auto& d : domains) {
    if (d.eigs->size() != cal.n_slots * cal.division) {
      throw std::invalid_argument(std::string(d.name) + " eigen table has the wrong portion count");
    }
  }

  const double span = static_cast<double>(cal.n_p + cal.n_cp);
  const double portion_rate = cal.sample_rate_hz / span;
  const double slot_rate = cal.sample_rate_hz / (span * static_cast<double>(cal.division));
  const std::size_t n_portions = cal.n_slots * cal.division;

  SweepResult out;
  auto emit_joint = [&](const char* domain, const std::vector<std::vector<double>>& eigs, double snr,
                        double budget) {
    std::vector<double> all;
    for (const auto& e : eigs) all.insert(all.end(), e.begin(), e.end());
    const auto wf = waterfill(all, budget * static_cast<double>(n_portions));
    std::vector<double> bits(n_portions, 0.0);
    std::size_t k = 0;
    for (std::size_t p = 0; p < n_portions; ++p) {
      for (double lambda : eigs[p]) bits[p] += std::log2(1.0 + wf.power[k++] * lambda);
    }
    const auto slots = slot_capacities(bits, cal.division);
    const auto classes = per_class_report(slots, labels);
    auto emit = [&](const char* scope, std::size_t id, double b, double rate) {
      out.rows.push_back({snr, "csit-joint", domain, scope, id, b, b * rate});
    };
    for (std::size_t p = 0; p < n_portions; ++p) emit("portion", p, bits[p], portion_rate);
    for (std::size_t s = 0; s < slots.size(); ++s) emit("slot", s, slots[s], slot_rate);
    for (std::size_t c = 0; c < 3; ++c) {
      if (classes.mean[c]) emit("class", c + 1, *classes.mean[c], slot_rate);
    }
    emit("overall", 0, classes.overall, slot_rate);
  };
  for (double snr : config.snr_db) {
    const double eps = epsilon_for_snr(snr, cal.noise_variance, cal.channel_gain);
    const double budget = eps * static_cast<double>(cal.tx * cal.n_p);
    for (const auto& d : domains) {
      for (const char* mode : {"csit", "no-csit"}) {
        const bool csit = std::string_view(mode) == "csit";
        if (csit ? !config.mode_csit : !config.mode_no_csit) continue;
        std::vector<double> bits(n_portions);
        for (std::size_t p = 0; p < n_portions; ++p) {
          const auto& e = (*d.eigs)[p];
          if (!csit) {
            bits[p] = capacity_from_eigs(e, eps);
            continue;
          }
          const auto wf = waterfill(e, budget);
          bits[p] = wf.bits;
          if (d.eigs == domains.front().eigs) {
            for (std::size_t i = 0; i < e.size(); ++i) {
              out.allocations.push_back({snr, p, i, e[i], wf.power[i]});
            }
          }
        }
        const auto slots = slot_capacities(bits, cal.division);
        const auto classes = per_class_report(slots, labels);
        auto emit = [&](const char* scope, std::size_t id, double b, double rate) {
          out.rows.push_back({snr, mode, d.name, scope, id, b, b * rate});
        };
        for (std::size_t p = 0; p < n_portions; ++p) emit("portion", p, bits[p], portion_rate);
        for (std::size_t s = 0; s < slots.size(); ++s) emit("slot", s, slots[s], slot_rate);
        for (std::size_t c = 0; c < 3; ++c) {
          if (classes.mean[c]) emit("class", c + 1, *classes.mean[c], slot_rate);
        }
        emit("overall", 0, classes.overall, slot_rate);
      }
      if (config.joint_waterfill) emit_joint(d.name, *d.eigs, snr, budget);
    }
  }
  return out;
}

void stage_generate(const PipelineConfig& config, std::ostream* log) {
  const bool chan_file = config.channel_kind == ChannelKind::file;
  const auto chan = in_stage(chan_file ? "channel.load" : "channel",
                             [&] { return make_channel(config); });
  if (config.n_cp + 1 < chan.taps()) throw StageError("channel", "insufficient cyclic prefix");
  note(log, "generate", "channel " + std::to_string(chan.rx()) + "x" + std::to_string(chan.tx()) +
                            ", L=" + std::to_string(chan.taps()));

  const std::string noise_stage =
      config.noise_kind == NoiseKind::file ? "noise.load" : "noise.generate";
  const auto trace = in_stage(noise_stage, [&] { return make_noise(config); });
  const auto plan = describe(config);
  note(log, "generate", std::to_string(trace.phase_count()) + " phases, " +
                            std::to_string(trace.n_periods) + " periods of " +
                            std::to_string(trace.samples_per_period) + " samples, " +
                            std::to_string(plan.n_slots) + " slots per period");

  in_stage("generate", [&] {
    const fs::path& out = config.output_dir;
    write_trace(out / artifact::trace, out / artifact::trace_meta, trace);
    if (config.noise_kind == NoiseKind::fresh) write_filter_bank(out / artifact::bank, make_filter_bank(config));
    save_channel(out / artifact::channel, chan);
    const auto circ = build_conv_matrix(chan, ConvKind::circulant, config.n_fft, config.n_cp);
    const auto response = fft_diagonalize(circ);
    write_frequency_response(out / artifact::channel_response, response);
    write_key_values(out / artifact::plan,
                     {
                         {"sample_rate_hz", format_number(plan.sample_rate_hz)},
                         {"samples_per_period", std::to_string(plan.samples_per_period)},
                         {"n_slots", std::to_string(plan.n_slots)},
                         {"slot_length", std::to_string(plan.slot_length)},
                         {"max_division", std::to_string(plan.max_division)},
                         {"channel_taps", std::to_string(plan.channel_taps)},
                         {"channel_rx", std::to_string(plan.channel_rx)},
                         {"channel_tx", std::to_string(plan.channel_tx)},
                         {"bank_branches", std::to_string(plan.bank_branches)},
                         {"bank_taps", std::to_string(plan.bank_taps)},
                         {"bank_filters", std::to_string(plan.bank_filters)},
                     });
  });
}

void stage_classify(const PipelineConfig& config, std::ostream* log) {
  const auto trace = load_trace_artifact(config, "classify");
  const auto cls = in_stage("classify", [&] {
    return classify_slots(trace, config.n_fft, config.n_cp, config.th1, config.th2,
                          config.analysis_n_period);
  });
  std::string csv = "slot,sigma,D,class\n";
  std::array<int, 3> counts{};
  for (std::size_t s = 0; s < cls.labels.size(); ++s) {
    csv += std::to_string(s) + "," + format_number(cls.sigma[s]) + "," +
           format_number(cls.distance[s]) + "," + std::to_string(cls.labels[s]) + "\n";
    ++counts[static_cast<std::size_t>(cls.labels[s] - 1)];
  }
  in_stage("classify", [&] { write_file(config.output_dir / artifact::classification, csv); });
  note(log, "classify", "sigma_min " + format_number(cls.sigma_min) + ", class sizes " +
                            std::to_string(counts[0]) + "/" + std::to_string(counts[1]) + "/" +
                            std::to_string(counts[2]));
}

void stage_gaussianity(const PipelineConfig& config, std::ostream* log) {
  const auto trace = load_trace_artifact(config, "gaussianity");
  GaussianityOptions opt;
  opt.threshold = config.kld_threshold;
  opt.iterations = config.kld_iterations;
  opt.n_period = config.analysis_n_period;
  opt.bins = config.kld_bins;
  opt.seed = derive_seed(config.seed, "gaussianity");
  const auto result =
      in_stage("gaussianity", [&] { return gaussianity_search(trace, config.n_fft, config.n_cp, opt); });

  std::string csv = "A,portion,kld,pass\n";
  for (const auto& row : result.table) {
    csv += std::to_string(row.division) + "," + std::to_string(row.portion) + "," +
           format_number(row.kld) + "," + bool_str(row.pass) + "\n";
  }
  const auto& p = result.partition;
  in_stage("gaussianity", [&] {
    write_file(config.output_dir / artifact::gaussianity, csv);
    write_key_values(config.output_dir / artifact::partition,
                     {
                         {"samples_per_period", std::to_string(trace.samples_per_period)},
                         {"n_fft", std::to_string(p.n_fft)},
                         {"n_cp", std::to_string(p.n_cp)},
                         {"n_slots", std::to_string(p.n_slots)},
                         {"division", std::to_string(p.division)},
                         {"portion_length", std::to_string(p.portion_length)},
                         {"gaussian", bool_str(p.gaussian)},
                     });
  });
  note(log, "gaussianity", "A=" + std::to_string(p.division) + ", N_p=" +
                               std::to_string(p.portion_length) +
                               (p.gaussian ? "" : " (threshold not met at the finest division)"));
}

void stage_whiten(const PipelineConfig& config, std::ostream* log) {
  const auto trace = load_trace_artifact(config, "whiten");
  const auto partition = load_partition_artifact(config, "whiten");
  const auto chan = load_channel_artifact(config, "whiten");
  const std::size_t n = partition.portion_count();

  struct Row {
    PortionCorrelation corr;
    Whitener w;
    double residual = 0.0;
    bool circulant = false;
  };
  std::vector<Row> rows(n);
  in_stage("whiten", [&] {
    const std::size_t n_period = whitening_periods(config, trace);
    const auto h = build_conv_matrix(chan, ConvKind::circulant, partition.portion_length,
                                     partition.n_cp);
    parallel_for(n, [&](std::size_t p) {
      auto& row = rows[p];
      row.corr = estimate_autocorr(trace, partition, p, n_period);
      row.w = make_whitener(row.corr);
      CovarianceAccumulator acc(row.corr.r.rows());
      const std::size_t first = trace.first_usable_period();
      for (std::size_t k = first; k < first + n_period; ++k) {
        acc.add(whiten_block(row.w, portion_vector(trace, partition, p, k)));
      }
      const auto rww = acc.covariance(true);
      row.residual = frobenius_norm(rww - ComplexMatrix::identity(rww.rows())) /
                     std::sqrt(static_cast<double>(rww.rows()));
      row.circulant = is_block_circulant(composite_channel(row.w, h), chan.rx(), chan.tx(), 1e-9);
    });
  });

  std::string csv = "portion,dim,periods,rank_deficient,loaded,loading,residual,circulant\n";
  std::size_t deficient = 0;
  double max_mean = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    const auto& r = rows[p];
    deficient += r.corr.rank_deficient ? 1 : 0;
    max_mean = std::max(max_mean, r.corr.max_abs_mean);
    csv += std::to_string(p) + "," + std::to_string(r.corr.r.rows()) + "," +
           std::to_string(r.corr.samples) + "," + bool_str(r.corr.rank_deficient) + "," +
           bool_str(r.w.loaded) + "," + format_number(r.w.loading) + "," +
           format_number(r.residual) + "," + bool_str(r.circulant) + "\n";
  }
  in_stage("whiten", [&] {
    write_file(config.output_dir / artifact::whitening, csv);
    if (config.whiten_dump) {
      std::vector<PortionCorrelation> corr;
      for (auto& r : rows) corr.push_back(r.corr);
      write_correlation(config.output_dir / artifact::correlation, corr);
    }
  });
  note(log, "whiten", std::to_string(n) + " portions of dimension " +
                          std::to_string(rows.front().corr.r.rows()) +
                          (deficient ? ", " + std::to_string(deficient) +
                                           " rank-deficient (diagonal loading applied)"
                                     : ""));
  note(log, "whiten", "sample mean removed, largest entry " + format_number(max_mean));
}

void stage_capacity(const PipelineConfig& config, std::ostream* log) {
  const auto trace = load_trace_artifact(config, "capacity");
  const auto partition = load_partition_artifact(config, "capacity");
  const auto chan = load_channel_artifact(config, "capacity");
  const auto [eigen, cal] = in_stage("capacity", [&] {
    const std::size_t n_period = whitening_periods(config, trace);
    return std::pair{compute_eigen(trace, partition, chan, n_period, config.domain_time,
                                   config.domain_frequency),
                     calibrate(trace, partition, chan, n_period)};
  });

  std::string csv = "domain,portion,eig_index,eigenvalue\n";
  auto dump = [&](const char* name, const std::vector<std::vector<double>>& table) {
    for (std::size_t p = 0; p < table.size(); ++p) {
      for (std::size_t i = 0; i < table[p].size(); ++i) {
        csv += std::string(name) + "," + std::to_string(p) + "," + std::to_string(i) + "," +
               format_number(table[p][i]) + "\n";
      }
    }
  };
  dump("time", eigen.time);
  dump("frequency", eigen.frequency);
  in_stage("capacity", [&] {
    write_file(config.output_dir / artifact::eigen, csv);
    write_key_values(config.output_dir / artifact::calibration,
                     {
                         {"noise_variance", format_number(cal.noise_variance)},
                         {"channel_gain", format_number(cal.channel_gain)},
                         {"sample_rate_hz", format_number(cal.sample_rate_hz)},
                         {"rx", std::to_string(cal.rx)},
                         {"tx", std::to_string(cal.tx)},
                         {"n_p", std::to_string(cal.n_p)},
                         {"n_cp", std::to_string(cal.n_cp)},
                         {"division", std::to_string(cal.division)},
                         {"n_slots", std::to_string(cal.n_slots)},
                     });
  });
  note(log, "capacity", "noise variance " + format_number(cal.noise_variance) +
                            ", channel gain " + format_number(cal.channel_gain));
}

void stage_sweep(const PipelineConfig& config, std::ostream* log) {
  const auto labels = load_labels_artifact(config, "sweep");
  const auto cal_path = require_artifact(config, artifact::calibration, "sweep", "capacity");
  const auto eig_path = require_artifact(config, artifact::eigen, "sweep", "capacity");

  const auto result = in_stage("sweep", [&] {
    const auto kv = read_key_values(cal_path);
    Calibration cal;
    cal.noise_variance = get_number(kv, "noise_variance", cal_path);
    cal.channel_gain = get_number(kv, "channel_gain", cal_path);
    cal.sample_rate_hz = get_number(kv, "sample_rate_hz", cal_path);
    cal.rx = get_count(kv, "rx", cal_path);
    cal.tx = get_count(kv, "tx", cal_path);
    cal.n_p = get_count(kv, "n_p", cal_path);
    cal.n_cp = get_count(kv, "n_cp", cal_path);
    cal.division = get_count(kv, "division", cal_path);
    cal.n_slots = get_count(kv, "n_slots", cal_path);

    EigenTable eigen;
    CsvReader reader(eig_path, "domain,portion,eig_index,eigenvalue");
    std::vector<std::string_view> f;
    while (reader.next(f)) {
      if (f.size() != 4) reader.fail("expected 4 fields");
      if (f[0] != "time" && f[0] != "frequency") reader.fail("unknown domain");
      auto& table = f[0] == "time" ? eigen.time : eigen.frequency;
      const std::size_t p = parse_count(f[1]);
      const std::size_t i = parse_count(f[2]);
      if (table.size() <= p) table.resize(p + 1);
      if (table[p].size() != i) reader.fail("eigenvalues out of order");
      table[p].push_back(parse_number(f[3]));
    }
    return capacity_sweep(eigen, cal, labels, config);
  });

  std::string csv = "snr_db,mode,domain,scope,scope_id,capacity_bits,capacity_bits_per_sec\n";
  for (const auto& r : result.rows) {
    csv += format_number(r.snr_db) + "," + r.mode + "," + r.domain + "," + r.scope + "," +
           std::to_string(r.scope_id) + "," + format_number(r.bits) + "," +
           format_number(r.bits_per_sec) + "\n";
  }
  std::string alloc = "snr_db,portion,eig_index,eigenvalue,power\n";
  for (const auto& a : result.allocations) {
    alloc += format_number(a.snr_db) + "," + std::to_string(a.portion) + "," +
             std::to_string(a.eig_index) + "," + format_number(a.eigenvalue) + "," +
             format_number(a.power) + "\n";
  }
  in_stage("sweep", [&] {
    write_file(config.output_dir / artifact::capacity, csv);
    if (config.mode_csit) write_file(config.output_dir / artifact::allocation, alloc);
  });
  note(log, "sweep", std::to_string(config.snr_db.size()) + " SNR points, " +
                         std::to_string(result.rows.size()) + " capacity rows");
}

std::vector<fs::path> render_report(const fs::path& capacity_csv, const fs::path& out_dir) {
  struct Key {
    std::string mode, scope;
    std::size_t id;
    bool operator<(const Key& o) const {
      return std::tie(mode, scope, id) < std::tie(o.mode, o.scope, o.id);
    }
  };
  std::map<std::string, std::map<Key, PlotSeries>> by_domain;
  CsvReader reader(capacity_csv,
                   "snr_db,mode,domain,scope,scope_id,capacity_bits,capacity_bits_per_sec");
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    if (f.size() != 7) reader.fail("expected 7 fields");
    const std::string scope(f[3]);
    if (scope != "slot" && scope != "class") continue;
    Key key{std::string(f[1]), scope, parse_count(f[4])};
    auto& s = by_domain[std::string(f[2])][key];
    s.x.push_back(parse_number(f[0]));
    s.y.push_back(parse_number(f[5]));
  }
  if (by_domain.empty()) throw std::runtime_error(capacity_csv.string() + ": no slot or class rows");
  const std::string domain = by_domain.count("time") ? "time" : by_domain.begin()->first;
  const auto& series = by_domain[domain];

  std::vector<fs::path> written;
  for (const char* scope : {"slot", "class"}) {
    for (const char* mode : {"csit", "no-csit"}) {
      LineChart chart;
      chart.title = std::string(scope == std::string_view("slot") ? "Per-slot" : "Per-class") +
                    " capacity, " + (mode == std::string_view("csit") ? "CSIT" : "no CSIT") +
                    " (" + domain + " domain)";
      for (const auto& [key, s] : series) {
        if (key.mode != mode || key.scope != scope) continue;
        PlotSeries copy = s;
        copy.label = std::string(scope == std::string_view("slot") ? "slot " : "class ") +
                     std::to_string(key.id);
        chart.series.push_back(std::move(copy));
      }
      if (chart.series.empty()) continue;
      const std::string tag = mode == std::string_view("csit") ? "csit" : "nocsit";
      const fs::path path = out_dir / ("capacity_" + std::string(scope) + "_" + tag + ".svg");
      write_file(path, render_svg(chart));
      written.push_back(path);
    }
  }
  return written;
}

void stage_report(const PipelineConfig& config, std::ostream* log) {
  const auto csv = require_artifact(config, artifact::capacity, "report", "sweep");
  const auto files = in_stage("report", [&] { return render_report(csv, config.output_dir); });
  note(log, "report", std::to_string(files.size()) + " plots written");
}

void run_pipeline(const PipelineConfig& config, std::ostream* log) {
  const auto diags = validate(config);
  if (!diags.empty()) {
    std::string msg;
    for (const auto& d : diags) msg += (msg.empty() ? "" : "; ") + d.stage + ": " + d.message;
    throw StageError(diags.front().stage, msg);
  }
  stage_generate(config, log);
  stage_classify(config, log);
  stage_gaussianity(config, log);
  stage_whiten(config, log);
  stage_capacity(config, log);
  stage_sweep(config, log);
  stage_report(config, log);
}

}  // namespace plclab
