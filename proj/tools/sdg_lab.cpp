#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "sdg/io.hpp"
#include "sdg/runner.hpp"

namespace {

std::optional<std::uint64_t> seed_from_env() {
  const char* s = std::getenv("SDG_LAB_SEED");
  if (!s || !*s) return std::nullopt;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != std::string(s).size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    std::cerr << "error: SDG_LAB_SEED must be a nonnegative integer\n";
    std::exit(sdg::kExitError);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte-Carlo and PDE experiments for stochastic differential games"};
  app.set_version_flag("--version", sdg::kToolVersion);
  app.require_subcommand(1);

  std::string config;
  unsigned threads = 0;
  std::string out_dir;

  auto* run = app.add_subcommand("run", "Execute the task of a config file");
  run->add_option("config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--threads", threads, "Worker cap; results do not depend on it")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "Output directory (overrides output.dir)");

  auto* validate = app.add_subcommand("validate", "Parse and check a config without running it");
  validate->add_option("config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : sdg::kExitError;
  }

  if (*validate) return sdg::validate_config(config, std::cout, std::cerr);

  sdg::RunOptions opts;
  if (threads > 0) opts.threads = threads;
  if (!out_dir.empty()) opts.out_dir = out_dir;
  opts.seed = seed_from_env();
  return sdg::run(config, opts, std::cout, std::cerr);
}
