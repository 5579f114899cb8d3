// SPDX-License-Identifier: Apache-2.0
// Drives the plc-capacity-lab executable end to end.
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <string>

#include "plclab/io.hpp"
#include "plclab/pipeline.hpp"
#include "support.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kExe = PLCLAB_CLI_PATH;
const fs::path kFixtures = PLCLAB_TEST_FIXTURES;

struct Result {
  int status = -1;
  std::string out;
  std::string err;
};

Result run(const std::string& args, const testing::TempDir& dir) {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = "'" + kExe.string() + "' " + args + " >'" + out.string() + "' 2>'" +
                          err.string() + "'";
  const int raw = std::system(cmd.c_str());
  Result r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = plclab::read_file(out);
  r.err = plclab::read_file(err);
  return r;
}

void write_config(const fs::path& path, const std::string& extra) {
  plclab::write_file(path,
                     "noise.samples_per_period=80\n"
                     "noise.n_periods=80\n"
                     "fresh.branches=3\n"
                     "fresh.taps=5\n"
                     "channel.taps=5\n"
                     "frame.n_fft=32\n"
                     "frame.n_cp=8\n"
                     "classify.th1=0.1\n"
                     "classify.th2=0.3\n"
                     "gaussianity.iterations=20\n"
                     "capacity.snr_db=0,20\n"
                     "output.dir=out\n" +
                         extra);
}

}  // namespace

TEST_CASE("unknown or missing subcommand prints usage and exits 2") {
  testing::TempDir dir("cli-usage");
  auto r = run("frobnicate --config x.conf", dir);
  CHECK(r.status == 2);
  CHECK(r.err.find("usage: plc-capacity-lab") != std::string::npos);
  CHECK(r.err.find("frobnicate") != std::string::npos);

  r = run("", dir);
  CHECK(r.status == 2);

  r = run("run", dir);  // --config is required
  CHECK(r.status == 2);
}

TEST_CASE("validate and describe") {
  testing::TempDir dir("cli-validate");
  write_config(dir / "ok.conf", "");
  auto r = run("validate --config '" + (dir / "ok.conf").string() + "'", dir);
  CHECK(r.status == 0);
  CHECK(r.out == "ok\n");

  write_config(dir / "bad.conf", "classify.th1=0.5\nframe.n_cp=2\n");
  r = run("validate --config '" + (dir / "bad.conf").string() + "'", dir);
  CHECK(r.status == 1);
  CHECK(r.out.find("classify: classification thresholds misordered") != std::string::npos);
  CHECK(r.out.find("channel: insufficient cyclic prefix") != std::string::npos);

  plclab::write_file(dir / "full.conf", "noise.mains_hz=62.5\n");
  r = run("describe --config '" + (dir / "full.conf").string() + "'", dir);
  CHECK(r.status == 0);
  CHECK(r.out.find("samples_per_period=3200\n") != std::string::npos);
  CHECK(r.out.find("n_slots=10\n") != std::string::npos);
  CHECK(r.out.find("L=65") != std::string::npos);
  CHECK(r.out.find("fresh_bank=K19 taps=65 filters=76") != std::string::npos);

  plclab::write_file(dir / "typo.conf", "frame.nfft=32\n");
  r = run("validate --config '" + (dir / "typo.conf").string() + "'", dir);
  CHECK(r.status == 1);
  CHECK(r.err.find("error [config]") != std::string::npos);
}

TEST_CASE("missing channel file fails in channel.load") {
  testing::TempDir dir("cli-chan");
  write_config(dir / "c.conf", "channel.kind=file\nchannel.path=nowhere.csv\n");
  const auto r = run("run --config '" + (dir / "c.conf").string() + "'", dir);
  CHECK(r.status == 1);
  CHECK(r.err.find("error [channel.load]") != std::string::npos);

  const auto g = run("generate --config '" + (dir / "c.conf").string() + "'", dir);
  CHECK(g.status == 1);
  CHECK(g.err.find("error [channel.load]") != std::string::npos);
}

TEST_CASE("stage subcommands reproduce run byte for byte") {
  testing::TempDir dir("cli-stages");
  write_config(dir / "c.conf", "");
  const std::string cfg = " --config '" + (dir / "c.conf").string() + "'";

  auto r = run("classify" + cfg + " --out '" + (dir / "staged").string() + "'", dir);
  CHECK(r.status == 1);
  CHECK(r.err.find("trace.csv") != std::string::npos);
  CHECK(r.err.find("generate") != std::string::npos);

  for (const char* stage : {"generate", "classify", "gaussianity", "whiten", "capacity", "sweep", "report"}) {
    CAPTURE(stage);
    r = run(std::string(stage) + cfg + " --out '" + (dir / "staged").string() + "'", dir);
    REQUIRE(r.status == 0);
  }
  r = run("run" + cfg, dir);
  REQUIRE(r.status == 0);
  for (const char* name : {plclab::artifact::trace, plclab::artifact::classification,
                           plclab::artifact::gaussianity, plclab::artifact::whitening,
                           plclab::artifact::eigen, plclab::artifact::capacity}) {
    CAPTURE(name);
    CHECK(plclab::read_file(dir / "staged" / name) == plclab::read_file(dir / "out" / name));
  }

  r = run("run" + cfg + " --seed 9 --out '" + (dir / "seeded").string() + "'", dir);
  REQUIRE(r.status == 0);
  CHECK(plclab::read_file(dir / "seeded" / plclab::artifact::trace) !=
        plclab::read_file(dir / "out" / plclab::artifact::trace));
}

TEST_CASE("report renders the shipped capacity table") {
  testing::TempDir dir("cli-report");
  fs::create_directories(dir / "out");
  fs::copy_file(kFixtures / "capacity.csv", dir / "out" / "capacity.csv");
  plclab::write_file(dir / "r.conf", "output.dir=out\n");
  const auto r = run("report --config '" + (dir / "r.conf").string() + "'", dir);
  CHECK(r.status == 0);
  int svgs = 0;
  for (const auto& e : fs::directory_iterator(dir / "out")) svgs += e.path().extension() == ".svg";
  CHECK(svgs == 4);
}
