#include <iostream>

#include <CLI11.hpp>

#include "gffperc/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Massive Gaussian free field level-set percolation experiments"};
  gffperc::RunOptions opts;
  std::string config, out;
  std::uint64_t seed = 0;
  app.add_option("command", opts.command, "pcurve | qcurve | threshold | verify | dump-field")
      ->required()
      ->check(CLI::IsMember({"pcurve", "qcurve", "threshold", "verify", "dump-field"}));
  auto* c = app.add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
  auto* s = app.add_option("--seed", seed, "master seed (overrides the config)");
  auto* o = app.add_option("--out", out, "output directory (overrides the config)");
  app.add_option("--workers", opts.workers, "worker threads, 0 = hardware concurrency")->check(CLI::NonNegativeNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  if (*c) opts.config = config;
  if (*s) opts.seed = seed;
  if (*o) opts.out = out;
  return gffperc::run(opts, std::cerr);
}
