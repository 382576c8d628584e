// End-to-end smoke tests of the fasr binary; the binary path arrives as the
// first command-line argument.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "fasr/io.hpp"

namespace fs = std::filesystem;

namespace {

std::string g_binary;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str(const std::string& sub = "") const {
    return (sub.empty() ? path : path / sub).string();
  }
};

int run(const std::string& args) {
  const std::string cmd = g_binary + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_config(const std::string& path, const std::string& extra = "") {
  std::ofstream os(path);
  os << "n_identities = 4\n"
     << "n_images_per_identity = 4\n"
     << "base_channels = 4\n"
     << "levels = 2\n"
     << "embed_dim = 8\n"
     << "train_steps = 6\n"
     << "batch_size = 2\n"
     << "sampler_steps = 12\n"
     << "log_interval = 2\n"
     << "seed = 5\n"
     << extra;
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(is)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("cli: full synth/train/sr/eval round trip") {
  TempDir dir("fasr_cli_roundtrip");
  const std::string cfg = dir.str("run.cfg");
  write_config(cfg);

  // synth
  REQUIRE(run("synth --config " + cfg + " --out " + dir.str("data")) == 0);
  CHECK(fs::exists(dir.str("data") + "/identities.csv"));
  CHECK(fs::exists(dir.str("data") + "/resolved_config.txt"));
  // refuses to clobber without --force
  CHECK(run("synth --config " + cfg + " --out " + dir.str("data")) == 1);
  CHECK(run("synth --config " + cfg + " --out " + dir.str("data") +
            " --force") == 0);

  // train
  REQUIRE(run("train --config " + cfg + " --dataset " + dir.str("data") +
              " --out " + dir.str("model")) == 0);
  const std::string ckpt = dir.str("model") + "/model.ckpt";
  CHECK(fs::exists(ckpt));
  CHECK(fs::exists(dir.str("model") + "/loss_trace.csv"));

  // sr on the first probe
  const std::string probe = dir.str("data") + "/id_00000_probe.pgm";
  REQUIRE(fs::exists(probe));
  REQUIRE(run("sr --config " + cfg + " --checkpoint " + ckpt + " --lr " +
              probe + " --out " + dir.str("sr.pgm") + " --seed 3 --trace " +
              dir.str("trace.csv")) == 0);
  const fasr::Tensor sr = fasr::io::load_pgm(dir.str("sr.pgm"));
  CHECK(sr.shape() == std::vector<std::size_t>{32, 32});
  CHECK(read_file(dir.str("trace.csv")).rfind("step,t,l2_norm", 0) == 0);

  // sr determinism: same seed, same bytes; different seed, different bytes
  REQUIRE(run("sr --config " + cfg + " --checkpoint " + ckpt + " --lr " +
              probe + " --out " + dir.str("sr2.pgm") + " --seed 3") == 0);
  CHECK(read_file(dir.str("sr.pgm")) == read_file(dir.str("sr2.pgm")));
  REQUIRE(run("sr --config " + cfg + " --checkpoint " + ckpt + " --lr " +
              probe + " --out " + dir.str("sr3.pgm") + " --seed 4") == 0);
  CHECK(read_file(dir.str("sr.pgm")) != read_file(dir.str("sr3.pgm")));

  // eval with ablation rows
  REQUIRE(run("eval --config " + cfg + " --checkpoint " + ckpt +
              " --dataset " + dir.str("data") + " --out " + dir.str("report") +
              " --single-feature --unconditional-features") == 0);
  const std::string csv = read_file(dir.str("report") + "/report.csv");
  CHECK(csv.find("LR-baseline") != std::string::npos);
  CHECK(csv.find("FASR-toy") != std::string::npos);
  CHECK(csv.find("FASR-toy-single-feature") != std::string::npos);
  CHECK(csv.find("FASR-toy-unconditional-features") != std::string::npos);
}

TEST_CASE("cli: usage and config errors exit with code 1") {
  TempDir dir("fasr_cli_errors");
  CHECK(run("") == 1);                       // no subcommand
  CHECK(run("synth") == 1);                  // missing --out
  CHECK(run("frobnicate --out x") == 1);     // unknown subcommand

  const std::string bad = dir.str("bad.cfg");
  std::ofstream(bad) << "no_such_key = 1\n";
  CHECK(run("synth --config " + bad + " --out " + dir.str("d")) == 1);

  // architecture mismatch between config and checkpoint
  const std::string cfg = dir.str("run.cfg");
  write_config(cfg);
  REQUIRE(run("synth --config " + cfg + " --out " + dir.str("data")) == 0);
  REQUIRE(run("train --config " + cfg + " --dataset " + dir.str("data") +
              " --out " + dir.str("model")) == 0);
  const std::string other = dir.str("other.cfg");
  write_config(other, "base_channels = 8\n");
  CHECK(run("sr --config " + other + " --checkpoint " + dir.str("model") +
            "/model.ckpt --lr " + dir.str("data") + "/id_00000_probe.pgm" +
            " --out " + dir.str("x.pgm")) == 1);
}

TEST_CASE("cli: check subcommand") {
  TempDir dir("fasr_cli_check");
  CHECK(run("check") == 0);

  // an invalid schedule must be caught and reported as a diagnostic failure
  const std::string bad = dir.str("bad_sched.cfg");
  std::ofstream(bad) << "sigma_min = 2.0\nsigma_max = 2.0\n";
  CHECK(run("check --config " + bad) == 3);
}

TEST_CASE("cli: environment variables override config values") {
  TempDir dir("fasr_cli_env");
  const std::string cfg = dir.str("run.cfg");
  write_config(cfg);
  setenv("FASR_N_IDENTITIES", "2", 1);
  const int rc = run("synth --config " + cfg + " --out " + dir.str("data"));
  unsetenv("FASR_N_IDENTITIES");
  REQUIRE(rc == 0);
  const std::string resolved = read_file(dir.str("data") +
                                         "/resolved_config.txt");
  CHECK(resolved.find("n_identities = 2") != std::string::npos);
  CHECK(!fs::exists(dir.str("data") + "/id_00002_gallery.pgm"));
}

TEST_CASE("cli: train resume continues from a checkpoint") {
  TempDir dir("fasr_cli_resume");
  const std::string cfg = dir.str("run.cfg");
  write_config(cfg);
  REQUIRE(run("synth --config " + cfg + " --out " + dir.str("data")) == 0);
  REQUIRE(run("train --config " + cfg + " --dataset " + dir.str("data") +
              " --out " + dir.str("m1")) == 0);
  REQUIRE(run("train --config " + cfg + " --dataset " + dir.str("data") +
              " --out " + dir.str("m2") + " --resume " + dir.str("m1") +
              "/model.ckpt") == 0);
  // the resumed trace starts after the first run's final step
  const std::string trace = read_file(dir.str("m2") + "/loss_trace.csv");
  CHECK(trace.find("\n7,") != std::string::npos);
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: test_cli <path-to-fasr-binary>\n");
    return 1;
  }
  g_binary = argv[1];
  doctest::Context ctx;
  ctx.applyCommandLine(1, argv);
  return ctx.run();
}
