#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "sojourn/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Sojourn time and handoff rates in K-tier Poisson networks"};
  app.require_subcommand(1);

  sojourn::CommandOptions opts;
  std::string scenario, out_dir, grid;
  std::uint64_t seed = 0;
  bool serial = false;

  for (const char* name : {"analyze", "simulate", "compare", "validate"}) {
    CLI::App* sub = app.add_subcommand(name);
    if (std::string(name) == "validate") continue;
    sub->add_option("--scenario", scenario, "scenario JSON file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    sub->add_option("--seed", seed, "simulation seed (overrides simulation.seed)");
    sub->add_option("--grid", grid, "linear time grid a:b:n, both ends included");
    sub->add_flag("--serial", serial, "disable OpenMP");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : sojourn::exit_code::validation;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  if (!scenario.empty()) opts.scenario = scenario;
  if (!out_dir.empty()) opts.out_dir = out_dir;
  if (command != "validate" && app.get_subcommand(command)->count("--seed") > 0) opts.seed = seed;
  if (!grid.empty()) opts.grid = grid;
  opts.exec = serial ? sojourn::Execution::serial : sojourn::Execution::parallel;
  return sojourn::run_command(command, opts, std::cout, std::cerr);
}
