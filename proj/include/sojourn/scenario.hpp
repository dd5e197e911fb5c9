#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "sojourn/network.hpp"
#include "sojourn/simulation.hpp"

namespace sojourn {

struct GridSpec {
  enum class Mode { automatic, linear, log, list };
  Mode mode = Mode::automatic;
  double start = 0.0;
  double stop = 0.0;
  std::size_t count = 0;
  std::vector<double> values;  // Mode::list
};

struct SimulationSpec {
  std::uint64_t seed = 1;
  std::size_t replications = 20000;
  std::optional<double> horizon;  // empty: 50 analytic mean sojourn times
  double guard_epsilon = 1e-6;
  double crossing_tol = 1e-9;
};

struct Scenario {
  NetworkModel network;
  MobilityParams mobility;
  GridSpec grid;
  std::optional<SimulationSpec> simulation;
  std::string output_dir = "out";
};

// Throws ValidationError naming the offending key; unknown keys are errors.
Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::string& path);

// "a:b:n", linear and inclusive of both ends.
GridSpec parse_grid_option(const std::string& text);

std::vector<double> resolve_grid(const GridSpec& grid, const NetworkModel& net,
                                 const MobilityParams& mob);

sim::SimConfig resolve_sim_config(const SimulationSpec& spec, const NetworkModel& net,
                                  const MobilityParams& mob);

nlohmann::json scenario_to_json(const Scenario& s);

}  // namespace sojourn
