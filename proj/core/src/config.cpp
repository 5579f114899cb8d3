// SPDX-License-Identifier: Apache-2.0
#include "plclab/config.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <string>

#include "plclab/channel.hpp"
#include "plclab/noise_analysis.hpp"

namespace plclab {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, std::string_view value) {
  std::filesystem::path p{std::string(value)};
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

bool parse_bool(std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("not a boolean: '" + std::string(v) + "'");
}

std::vector<double> parse_number_list(std::string_view v) {
  std::vector<double> out;
  for (auto f : split_fields(v)) {
    if (!f.empty()) out.push_back(parse_number(f));
  }
  return out;
}

std::vector<std::size_t> parse_count_list(std::string_view v) {
  std::vector<std::size_t> out;
  for (auto f : split_fields(v)) {
    if (!f.empty()) out.push_back(parse_count(f));
  }
  return out;
}

std::vector<std::string_view> parse_word_list(std::string_view v) {
  std::vector<std::string_view> out;
  for (auto f : split_fields(v)) {
    if (!f.empty()) out.push_back(f);
  }
  return out;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_floating_point_v<T>) {
      out += format_number(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

using Setter = std::function<void(PipelineConfig&, std::string_view, const std::filesystem::path&)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"noise.kind",
       [](PipelineConfig& c, std::string_view v, const auto&) {
         if (v == "fresh") c.noise_kind = NoiseKind::fresh;
         else if (v == "nassar") c.noise_kind = NoiseKind::nassar;
         else if (v == "file") c.noise_kind = NoiseKind::file;
         else throw std::invalid_argument("expected fresh, nassar or file");
       }},
      {"noise.trace", [](auto& c, auto v, const auto& b) { c.noise_trace = resolve(b, v); }},
      {"noise.meta", [](auto& c, auto v, const auto& b) { c.noise_meta = resolve(b, v); }},
      {"noise.sample_rate_hz", [](auto& c, auto v, const auto&) { c.sample_rate_hz = parse_number(v); }},
      {"noise.mains_hz", [](auto& c, auto v, const auto&) { c.mains_hz = parse_number(v); }},
      {"noise.samples_per_period",
       [](auto& c, auto v, const auto&) { c.samples_per_period = parse_count(v); }},
      {"noise.n_periods", [](auto& c, auto v, const auto&) { c.n_periods = parse_count(v); }},
      {"noise.phases", [](auto& c, auto v, const auto&) { c.phases = parse_count(v); }},
      {"fresh.branches", [](auto& c, auto v, const auto&) { c.fresh_branches = parse_count(v); }},
      {"fresh.taps", [](auto& c, auto v, const auto&) { c.fresh_taps = parse_count(v); }},
      {"fresh.decay", [](auto& c, auto v, const auto&) { c.fresh_decay = parse_number(v); }},
      {"fresh.coupling", [](auto& c, auto v, const auto&) { c.fresh_coupling = parse_number(v); }},
      {"fresh.period", [](auto& c, auto v, const auto&) { c.fresh_period = parse_count(v); }},
      {"nassar.gains", [](auto& c, auto v, const auto&) { c.nassar_gains = parse_number_list(v); }},
      {"nassar.lengths", [](auto& c, auto v, const auto&) { c.nassar_lengths = parse_count_list(v); }},
      {"nassar.taps", [](auto& c, auto v, const auto&) { c.nassar_taps = parse_count(v); }},
      {"nassar.decay", [](auto& c, auto v, const auto&) { c.nassar_decay = parse_number(v); }},
      {"nassar.state",
       [](PipelineConfig& c, std::string_view v, const auto&) {
         if (v == "reset") c.nassar_state = RegionState::reset;
         else if (v == "carry") c.nassar_state = RegionState::carry;
         else throw std::invalid_argument("expected reset or carry");
       }},
      {"channel.kind",
       [](PipelineConfig& c, std::string_view v, const auto&) {
         if (v == "synthetic") c.channel_kind = ChannelKind::synthetic;
         else if (v == "file") c.channel_kind = ChannelKind::file;
         else throw std::invalid_argument("expected synthetic or file");
       }},
      {"channel.path", [](auto& c, auto v, const auto& b) { c.channel_path = resolve(b, v); }},
      {"channel.taps", [](auto& c, auto v, const auto&) { c.channel_taps = parse_count(v); }},
      {"channel.decay", [](auto& c, auto v, const auto&) { c.channel_decay = parse_number(v); }},
      {"frame.n_fft", [](auto& c, auto v, const auto&) { c.n_fft = parse_count(v); }},
      {"frame.n_cp", [](auto& c, auto v, const auto&) { c.n_cp = parse_count(v); }},
      {"classify.th1", [](auto& c, auto v, const auto&) { c.th1 = parse_number(v); }},
      {"classify.th2", [](auto& c, auto v, const auto&) { c.th2 = parse_number(v); }},
      {"analysis.n_period", [](auto& c, auto v, const auto&) { c.analysis_n_period = parse_count(v); }},
      {"gaussianity.threshold", [](auto& c, auto v, const auto&) { c.kld_threshold = parse_number(v); }},
      {"gaussianity.iterations", [](auto& c, auto v, const auto&) { c.kld_iterations = parse_count(v); }},
      {"gaussianity.bins", [](auto& c, auto v, const auto&) { c.kld_bins = parse_count(v); }},
      {"whiten.n_period", [](auto& c, auto v, const auto&) { c.whiten_n_period = parse_count(v); }},
      {"whiten.dump", [](auto& c, auto v, const auto&) { c.whiten_dump = parse_bool(v); }},
      {"capacity.snr_db", [](auto& c, auto v, const auto&) { c.snr_db = parse_number_list(v); }},
      {"capacity.joint_waterfill", [](auto& c, auto v, const auto&) { c.joint_waterfill = parse_bool(v); }},
      {"capacity.modes",
       [](PipelineConfig& c, std::string_view v, const auto&) {
         c.mode_csit = c.mode_no_csit = false;
         for (auto w : parse_word_list(v)) {
           if (w == "csit") c.mode_csit = true;
           else if (w == "no-csit") c.mode_no_csit = true;
           else throw std::invalid_argument("unknown mode '" + std::string(w) + "'");
         }
       }},
      {"capacity.domains",
       [](PipelineConfig& c, std::string_view v, const auto&) {
         c.domain_time = c.domain_frequency = false;
         for (auto w : parse_word_list(v)) {
           if (w == "time") c.domain_time = true;
           else if (w == "frequency") c.domain_frequency = true;
           else throw std::invalid_argument("unknown domain '" + std::string(w) + "'");
         }
       }},
      {"output.dir", [](auto& c, auto v, const auto& b) { c.output_dir = resolve(b, v); }},
      {"seed",
       [](auto& c, auto v, const auto&) {
         c.seed = static_cast<std::uint64_t>(parse_count(v));
       }},
  };
  return table;
}

}  // namespace

PipelineConfig parse_config(const KeyValues& values, const std::filesystem::path& base_dir) {
  PipelineConfig config;
  for (const auto& [key, value] : values) {
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown configuration key '" + key + "'");
    try {
      it->second(config, value, base_dir);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key + ": " + e.what());
    }
  }
  if (config.noise_meta.empty() && !config.noise_trace.empty()) {
    config.noise_meta = config.noise_trace;
    config.noise_meta.replace_extension(".meta");
  }
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  KeyValues values;
  try {
    values = read_key_values(path);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  return parse_config(values, path.parent_path());
}

KeyValues config_to_key_values(const PipelineConfig& c) {
  auto modes = [&] {
    std::vector<std::string> m;
    if (c.mode_csit) m.emplace_back("csit");
    if (c.mode_no_csit) m.emplace_back("no-csit");
    std::string s;
    for (const auto& w : m) s += (s.empty() ? "" : ",") + w;
    return s;
  };
  auto domains = [&] {
    std::string s;
    if (c.domain_time) s = "time";
    if (c.domain_frequency) s += s.empty() ? "frequency" : ",frequency";
    return s;
  };
  return {
      {"noise.kind", c.noise_kind == NoiseKind::fresh    ? "fresh"
                     : c.noise_kind == NoiseKind::nassar ? "nassar"
                                                         : "file"},
      {"noise.trace", c.noise_trace.string()},
      {"noise.meta", c.noise_meta.string()},
      {"noise.sample_rate_hz", format_number(c.sample_rate_hz)},
      {"noise.mains_hz", format_number(c.mains_hz)},
      {"noise.samples_per_period", std::to_string(c.samples_per_period)},
      {"noise.n_periods", std::to_string(c.n_periods)},
      {"noise.phases", std::to_string(c.phases)},
      {"fresh.branches", std::to_string(c.fresh_branches)},
      {"fresh.taps", std::to_string(c.fresh_taps)},
      {"fresh.decay", format_number(c.fresh_decay)},
      {"fresh.coupling", format_number(c.fresh_coupling)},
      {"fresh.period", std::to_string(c.fresh_period)},
      {"nassar.gains", join(c.nassar_gains)},
      {"nassar.lengths", join(c.nassar_lengths)},
      {"nassar.taps", std::to_string(c.nassar_taps)},
      {"nassar.decay", format_number(c.nassar_decay)},
      {"nassar.state", c.nassar_state == RegionState::reset ? "reset" : "carry"},
      {"channel.kind", c.channel_kind == ChannelKind::synthetic ? "synthetic" : "file"},
      {"channel.path", c.channel_path.string()},
      {"channel.taps", std::to_string(c.channel_taps)},
      {"channel.decay", format_number(c.channel_decay)},
      {"frame.n_fft", std::to_string(c.n_fft)},
      {"frame.n_cp", std::to_string(c.n_cp)},
      {"classify.th1", format_number(c.th1)},
      {"classify.th2", format_number(c.th2)},
      {"analysis.n_period", std::to_string(c.analysis_n_period)},
      {"gaussianity.threshold", format_number(c.kld_threshold)},
      {"gaussianity.iterations", std::to_string(c.kld_iterations)},
      {"gaussianity.bins", std::to_string(c.kld_bins)},
      {"whiten.n_period", std::to_string(c.whiten_n_period)},
      {"whiten.dump", c.whiten_dump ? "true" : "false"},
      {"capacity.snr_db", join(c.snr_db)},
      {"capacity.modes", modes()},
      {"capacity.domains", domains()},
      {"capacity.joint_waterfill", c.joint_waterfill ? "true" : "false"},
      {"output.dir", c.output_dir.string()},
      {"seed", std::to_string(c.seed)},
  };
}

std::size_t effective_samples_per_period(const PipelineConfig& config) {
  if (config.noise_kind == NoiseKind::file) {
    const auto meta = read_key_values(config.noise_meta);
    const auto it = meta.find("samples_per_period");
    if (it == meta.end()) {
      throw std::runtime_error(config.noise_meta.string() + ": missing key 'samples_per_period'");
    }
    return parse_count(it->second);
  }
  if (config.noise_kind == NoiseKind::nassar && !config.nassar_lengths.empty()) {
    return std::accumulate(config.nassar_lengths.begin(), config.nassar_lengths.end(),
                           std::size_t{0});
  }
  if (config.mains_hz > 0.0) return samples_per_half_cycle(config.sample_rate_hz, config.mains_hz);
  return config.samples_per_period;
}

std::vector<Diagnostic> validate(const PipelineConfig& c) {
  std::vector<Diagnostic> out;
  auto add = [&](std::string stage, std::string msg) {
    out.push_back({std::move(stage), std::move(msg)});
  };

  if (!(c.th1 < c.th2)) add("classify", "classification thresholds misordered");
  if (c.th1 < 0.0) add("classify", "th1 must be >= 0");
  if (c.n_fft == 0) add("frame", "N_fft must be >= 1");
  if (c.phases == 0) add("noise", "at least one phase is required");

  // Noise source.
  std::size_t spp = 0;
  std::size_t usable = 0;
  try {
    spp = effective_samples_per_period(c);
  } catch (const std::exception& e) {
    add("noise.load", e.what());
  }
  switch (c.noise_kind) {
    case NoiseKind::fresh: {
      if (c.fresh_branches == 0 || c.fresh_taps == 0) {
        add("noise.generate", "FRESH bank needs at least one branch and one tap");
      }
      if (!(c.fresh_decay > 0.0 && c.fresh_decay <= 1.0)) add("noise.generate", "fresh.decay must be in (0, 1]");
      if (!(c.fresh_coupling >= 0.0 && c.fresh_coupling <= 1.0)) {
        add("noise.generate", "fresh.coupling must be in [0, 1]");
      }
      const std::size_t period = c.fresh_period ? c.fresh_period : spp;
      if (period < c.fresh_branches) add("noise.generate", "fresh.period must be >= fresh.branches");
      if (spp > 0) {
        const std::size_t warm_periods = (c.fresh_taps - (c.fresh_taps ? 1 : 0) + spp - 1) / spp;
        usable = c.n_periods > warm_periods ? c.n_periods - warm_periods : 0;
      }
      break;
    }
    case NoiseKind::nassar: {
      if (c.nassar_gains.empty() || c.nassar_gains.size() != c.nassar_lengths.size()) {
        add("noise.generate", "nassar.gains and nassar.lengths must be non-empty and equally long");
      }
      if (std::any_of(c.nassar_gains.begin(), c.nassar_gains.end(),
                      [](double g) { return !(g > 0.0) || !std::isfinite(g); })) {
        add("noise.generate", "nassar.gains must be positive");
      }
      if (std::any_of(c.nassar_lengths.begin(), c.nassar_lengths.end(),
                      [](std::size_t n) { return n == 0; })) {
        add("noise.generate", "nassar.lengths must be positive");
      }
      if (c.nassar_taps == 0) add("noise.generate", "nassar.taps must be >= 1");
      if (!(c.nassar_decay > 0.0 && c.nassar_decay <= 1.0)) add("noise.generate", "nassar.decay must be in (0, 1]");
      if (spp > 0) {
        const std::size_t warm = c.nassar_state == RegionState::carry ? c.nassar_taps - 1 : 0;
        usable = c.n_periods - std::min(c.n_periods, (warm + spp - 1) / spp);
      }
      break;
    }
    case NoiseKind::file: {
      if (!std::filesystem::exists(c.noise_trace)) {
        add("noise.load", "trace file not found: " + c.noise_trace.string());
      }
      if (!std::filesystem::exists(c.noise_meta)) {
        add("noise.load", "trace metadata not found: " + c.noise_meta.string());
      } else {
        try {
          const auto meta = read_key_values(c.noise_meta);
          const std::size_t n = parse_count(meta.at("n_periods"));
          const std::size_t warm = meta.count("warmup_samples") ? parse_count(meta.at("warmup_samples")) : 0;
          usable = spp ? n - std::min(n, (warm + spp - 1) / spp) : 0;
          if (meta.count("n_phases") && parse_count(meta.at("n_phases")) != c.phases) {
            add("noise.load", "trace phase count differs from noise.phases");
          }
        } catch (const std::exception& e) {
          add("noise.load", std::string("bad trace metadata: ") + e.what());
        }
      }
      break;
    }
  }
  if (c.noise_kind != NoiseKind::file && !(c.sample_rate_hz > 0.0)) {
    add("noise", "sample rate must be > 0");
  }

  // Framing.
  if (spp > 0 && c.n_fft > 0) {
    try {
      (void)slice_slots(spp, c.n_fft, c.n_cp);
    } catch (const std::invalid_argument& e) {
      add("frame", e.what());
    }
  }

  // Channel.
  std::size_t taps = c.channel_taps;
  if (c.channel_kind == ChannelKind::file) {
    if (!std::filesystem::exists(c.channel_path)) {
      add("channel.load", "channel file not found: " + c.channel_path.string());
      taps = 0;
    } else {
      try {
        const auto chan = load_channel(c.channel_path, c.channel_taps ? std::optional(c.channel_taps)
                                                                      : std::nullopt);
        taps = chan.taps();
        if (chan.rx() != c.phases || chan.tx() != c.phases) {
          add("channel.load", "channel dimensions differ from noise.phases");
        }
      } catch (const std::exception& e) {
        add("channel.load", e.what());
        taps = 0;
      }
    }
  } else {
    if (c.channel_taps == 0) add("channel", "channel.taps must be >= 1");
    if (!(c.channel_decay > 0.0 && c.channel_decay <= 1.0)) add("channel", "channel.decay must be in (0, 1]");
  }
  if (taps > 0 && c.n_cp + 1 < taps) add("channel", "insufficient cyclic prefix");

  // Analysis.
  if (c.analysis_n_period == 0) add("classify", "analysis.n_period must be >= 1");
  if (usable < c.analysis_n_period) {
    add("classify", "trace has " + std::to_string(usable) + " usable periods, analysis needs " +
                        std::to_string(c.analysis_n_period));
  }
  if (!(c.kld_threshold > 0.0)) add("gaussianity", "gaussianity.threshold must be > 0");
  if (c.kld_iterations == 0) add("gaussianity", "gaussianity.iterations must be >= 1");
  if (c.kld_bins < 2) add("gaussianity", "gaussianity.bins must be >= 2");
  if (c.whiten_n_period > usable) {
    add("whiten", "whiten.n_period exceeds the " + std::to_string(usable) + " usable periods");
  }
  if (usable < 2) add("whiten", "whitening needs at least 2 usable periods");

  // Capacity.
  if (c.snr_db.empty()) add("capacity", "capacity.snr_db must not be empty");
  if (!std::is_sorted(c.snr_db.begin(), c.snr_db.end()) ||
      std::adjacent_find(c.snr_db.begin(), c.snr_db.end()) != c.snr_db.end()) {
    add("capacity", "capacity.snr_db must be strictly ascending");
  }
  if (!c.mode_csit && !c.mode_no_csit) add("capacity", "no capacity mode selected");
  if (!c.domain_time && !c.domain_frequency) add("capacity", "no capacity domain selected");
  if (c.output_dir.empty()) add("output", "output.dir must not be empty");
  return out;
}

}  // namespace plclab
