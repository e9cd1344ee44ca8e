#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "flock/commands.hpp"
#include "flock/errors.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> variant;
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--config", args.config_path, "configuration file (JSON or key = value)")
      ->required();
  sub->add_option("--out", args.out_dir, "output directory for report.json and CSV files");
  sub->add_option("--seed", args.seed, "override run.seed");
  sub->add_option("--workers", args.workers, "override run.workers");
  sub->add_option("--variant", args.variant, "override run.variant (paper|derived)")
      ->check(CLI::IsMember({"paper", "derived"}));
}

flock::RunConfig load(const CommonArgs& args) {
  flock::ConfigOverrides ov;
  ov.seed = args.seed;
  ov.workers = args.workers;
  if (args.variant)
    ov.variant = *args.variant == "paper" ? flock::RateVariant::Paper
                                          : flock::RateVariant::Derived;
  return flock::load_config(args.config_path, ov);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noisy flock alignment: simulation, theory, and bound checking"};
  app.require_subcommand(1);

  CommonArgs theory_args, sim_args, mc_args, noise_args;
  CLI::App* theory = app.add_subcommand("theory", "closed-form quantities and bounds");
  add_common(theory, theory_args);
  CLI::App* simulate = app.add_subcommand("simulate", "one simulation run");
  add_common(simulate, sim_args);
  CLI::App* montecarlo =
      app.add_subcommand("montecarlo", "repeated trials against the theoretical bound");
  add_common(montecarlo, mc_args);
  CLI::App* noise_check =
      app.add_subcommand("noise-check", "sample statistics of the smoothed noise");
  add_common(noise_check, noise_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (theory->parsed())
      return flock::cli::cmd_theory(load(theory_args), theory_args.out_dir, std::cout);
    if (simulate->parsed())
      return flock::cli::cmd_simulate(load(sim_args), sim_args.out_dir, std::cout);
    if (montecarlo->parsed())
      return flock::cli::cmd_montecarlo(load(mc_args), mc_args.out_dir, std::cout);
    if (noise_check->parsed())
      return flock::cli::cmd_noise_check(load(noise_args), noise_args.out_dir, std::cout);
  } catch (const flock::config_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return flock::cli::kExitUsage;
  } catch (const flock::hypothesis_error& e) {
    std::cerr << "hypothesis violated: " << e.what() << '\n';
    return flock::cli::kExitHypothesis;
  } catch (const flock::numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return flock::cli::kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return flock::cli::kExitUsage;
  }
  return flock::cli::kExitUsage;
}
