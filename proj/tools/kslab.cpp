#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "kslab/commands.hpp"
#include "kslab/config.hpp"
#include "kslab/errors.hpp"

namespace {

struct Options {
  std::string config;
  std::string output;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

int run(kslab::Command expected, const Options& opt) {
  std::ifstream in(opt.config, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read config " << opt.config << "\n";
    return kslab::kExitIo;
  }
  std::ostringstream text;
  text << in.rdbuf();

  kslab::ExperimentConfig cfg;
  try {
    cfg = kslab::parse_config(text.str());
  } catch (const kslab::ConfigError& e) {
    std::cerr << "config errors in " << opt.config << ":\n";
    for (const auto& m : e.messages()) std::cerr << "  " << m << "\n";
    return kslab::kExitConfig;
  }
  if (cfg.command != expected) {
    std::cerr << "error: config declares command '" << kslab::to_string(cfg.command)
              << "' but subcommand '" << kslab::to_string(expected) << "' was invoked\n";
    return kslab::kExitConfig;
  }
  if (!opt.output.empty()) cfg.output = opt.output;
  if (opt.seed) {
    cfg.sim.seed = *opt.seed;
    cfg.inequalities.seed = *opt.seed;
  }
  kslab::refresh_hash(cfg);
  return kslab::run_command(cfg, opt.jobs, std::cerr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Keller-Segel on the Poincare disk: simulations, bounds and inequality checks"};
  app.require_subcommand(1);
  Options opt;

  const std::pair<kslab::Command, const char*> subs[] = {
      {kslab::Command::simulate, "Run one simulation and check every bound along it"},
      {kslab::Command::sweep, "Run a (chi, M, I0) grid and label each cell's regime"},
      {kslab::Command::bounds, "Evaluate the closed-form bounds for a list of inputs"},
      {kslab::Command::inequalities, "Run the functional-inequality battery"}};
  for (const auto& [cmd, help] : subs) {
    CLI::App* sub = app.add_subcommand(kslab::to_string(cmd), help);
    sub->add_option("--config", opt.config, "JSON config path")->required()->check(CLI::ExistingFile);
    sub->add_option("--output", opt.output, "Output directory (overrides the config)");
    sub->add_option("--seed", opt.seed, "Seed override");
    sub->add_option("--jobs", opt.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->callback([cmd = cmd, &opt] { throw CLI::RuntimeError(run(cmd, opt)); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::RuntimeError& e) {
    return e.get_exit_code();
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kslab::kExitConfig;
  }
  return 0;
}
