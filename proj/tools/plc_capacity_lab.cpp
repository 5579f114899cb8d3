// SPDX-License-Identifier: Apache-2.0
// plc-capacity-lab: stage-wise driver for the noise/whitening/capacity pipeline.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "plclab/config.hpp"
#include "plclab/pipeline.hpp"

namespace {

constexpr int kUsageExit = 2;

const char* kUsage =
    "usage: plc-capacity-lab <subcommand> --config <path> [--out <dir>] [--seed <u64>]\n"
    "\n"
    "subcommands:\n"
    "  generate     synthesize or load the noise trace and channel\n"
    "  classify     three-class slot classification\n"
    "  gaussianity  KLD-based portion length search\n"
    "  whiten       per-portion autocorrelation and whitening summary\n"
    "  capacity     eigenvalues of the whitened composite channels\n"
    "  sweep        capacity vs SNR tables\n"
    "  report       SVG plots from capacity.csv\n"
    "  run          every stage in order\n"
    "  validate     print configuration diagnostics\n"
    "  describe     print the structural parameters of a run\n";

using Stage = std::function<void(const plclab::PipelineConfig&, std::ostream*)>;

const std::map<std::string, Stage>& stages() {
  static const std::map<std::string, Stage> table = {
      {"generate", plclab::stage_generate},
      {"classify", plclab::stage_classify},
      {"gaussianity", plclab::stage_gaussianity},
      {"whiten", plclab::stage_whiten},
      {"capacity", plclab::stage_capacity},
      {"sweep", plclab::stage_sweep},
      {"report", plclab::stage_report},
      {"run", plclab::run_pipeline},
  };
  return table;
}

bool known(const std::string& name) {
  return stages().count(name) || name == "validate" || name == "describe";
}

int print_diagnostics(const plclab::PipelineConfig& config) {
  const auto diags = plclab::validate(config);
  for (const auto& d : diags) std::cout << d.stage << ": " << d.message << '\n';
  if (diags.empty()) std::cout << "ok\n";
  return diags.empty() ? 0 : 1;
}

int print_plan(const plclab::PipelineConfig& config) {
  const auto plan = plclab::describe(config);
  std::cout << "sample_rate_hz=" << plan.sample_rate_hz << '\n'
            << "samples_per_period=" << plan.samples_per_period << '\n'
            << "n_slots=" << plan.n_slots << '\n'
            << "slot_length=" << plan.slot_length << '\n'
            << "max_division=" << plan.max_division << '\n'
            << "channel=" << plan.channel_rx << "x" << plan.channel_tx
            << " L=" << plan.channel_taps << '\n';
  if (plan.bank_branches) {
    std::cout << "fresh_bank=K" << plan.bank_branches << " taps=" << plan.bank_taps
              << " filters=" << plan.bank_filters << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2 || !known(argv[1])) {
    if (argc >= 2 && std::string(argv[1]) != "--help" && std::string(argv[1]) != "-h") {
      std::cerr << "unknown subcommand '" << argv[1] << "'\n\n";
    }
    std::cerr << kUsage;
    return kUsageExit;
  }
  const std::string command = argv[1];

  CLI::App app{"plc-capacity-lab " + command};
  app.name("plc-capacity-lab " + command);
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "configuration file (key=value)")->required();
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--seed", seed, "master seed (overrides seed)");
  try {
    app.parse(argc - 1, argv + 1);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageExit;
  }

  plclab::PipelineConfig config;
  try {
    config = plclab::load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error [config]: " << e.what() << '\n';
    return 1;
  }
  if (out_dir) config.output_dir = *out_dir;
  if (seed) config.seed = *seed;

  try {
    if (command == "validate") return print_diagnostics(config);
    if (command == "describe") return print_plan(config);
    stages().at(command)(config, &std::cerr);
  } catch (const plclab::StageError& e) {
    std::cerr << "error [" << e.stage() << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error [" << command << "]: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
