#include <iostream>

#include "CLI11.hpp"
#include "wpmp/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Particle toolkit for mean-field optimal control and PMP certificates"};
  app.require_subcommand(1);

  std::string scenario;
  std::string out_dir = ".";
  double dt = 0.0;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* cmd, bool with_out) {
    cmd->add_option("--scenario", scenario, "Scenario JSON file")->required();
    if (with_out) cmd->add_option("--out", out_dir, "Output directory");
    cmd->add_option("--dt-override", dt, "Replace the time step (must divide the horizon)");
    cmd->add_option("--seed", seed, "Override the scenario seed");
  };
  CLI::App* sim = app.add_subcommand("simulate", "Run the forward particle system");
  CLI::App* grad = app.add_subcommand("gradcheck", "Check functional gradients against the chain-rule oracle");
  CLI::App* pmp = app.add_subcommand("pmp-check", "Solve the costate and check the PMP certificate");
  CLI::App* needle = app.add_subcommand("needle-check", "Check first-order needle expansions");
  add_common(sim, true);
  add_common(grad, false);
  add_common(pmp, true);
  add_common(needle, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : wpmp::cli::kConfigError;
  }

  wpmp::cli::Overrides ov;
  for (CLI::App* cmd : {sim, grad, pmp, needle}) {
    if (cmd->parsed()) {
      if (cmd->count("--dt-override") > 0) ov.dt = dt;
      if (cmd->count("--seed") > 0) ov.seed = seed;
    }
  }
  if (sim->parsed()) return wpmp::cli::cmd_simulate(scenario, out_dir, ov, std::cout);
  if (grad->parsed()) return wpmp::cli::cmd_gradcheck(scenario, ov, std::cout);
  if (pmp->parsed()) return wpmp::cli::cmd_pmp_check(scenario, out_dir, ov, std::cout);
  return wpmp::cli::cmd_needle_check(scenario, ov, std::cout);
}
