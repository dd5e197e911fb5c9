#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sojourn/curve.hpp"
#include "sojourn/execution.hpp"
#include "sojourn/network.hpp"

namespace sojourn::sim {

class SimulatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimConfig {
  std::uint64_t seed = 1;
  std::size_t replications = 20000;
  double horizon = 0.0;  // travel time per replication
  double guard_epsilon = 1e-6;
  double crossing_tol = 1e-9;
  double guard_scale = 1.0;  // multiplies the guard distance; > 1 for sensitivity checks
  double start_x = 0.0;      // trajectory start, moves along +x
  double start_y = 0.0;

  void validate() const;
};

// 50 times the analytic mean sojourn time.
double default_horizon(const NetworkModel& net, const MobilityParams& mob);

struct Window {
  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
  double area() const { return (x_max - x_min) * (y_max - y_min); }
};

// max_kj beta_kj sqrt(ln(1/eps) / (pi min_j lambda_j))
double guard_distance(const NetworkModel& net, double guard_epsilon);

// Trajectory segment padded by guard_scale * guard_distance on every side.
Window simulation_window(const NetworkModel& net, const MobilityParams& mob, const SimConfig& cfg);

// 0.05 / (v sqrt(sum_k lambda_k max_j beta_jk^2))
double coarse_step(const NetworkModel& net, const MobilityParams& mob);

struct BaseStation {
  double x = 0.0;
  double y = 0.0;
  TierIndex tier = 0;
  std::size_t id = 0;
};

// Independent PPPs of every tier restricted to `window`. Points come from
// square tiles, each with its own Philox stream keyed by (seed, replication,
// tier, tile), so a larger window only adds points and a shifted window sees
// the same realization. Returned sorted by x; id is the position in that order.
std::vector<BaseStation> sample_network(const NetworkModel& net, const Window& window,
                                        std::uint64_t seed, std::size_t replication);

struct ServingResult {
  std::size_t index = 0;  // into the BS list
  double best = 0.0;      // weighted distance of the serving BS
  double runner_up = 0.0; // weighted distance of the best competitor
};

// Reference: exhaustive argmin of weight_k * distance, lowest id on ties.
ServingResult serving_bs_bruteforce(std::span<const BaseStation> bss, const NetworkModel& net,
                                    double x, double y);

// Same answer using the x-sorted order; scans outward until no farther BS can win.
class ServingIndex {
 public:
  ServingIndex(std::span<const BaseStation> bss, const NetworkModel& net);
  ServingResult query(double x, double y) const;

 private:
  std::span<const BaseStation> bss_;
  std::vector<double> xs_;
  std::vector<double> weight_;
  double w_min_;
};

struct HandoffEvent {
  double time = 0.0;
  TierIndex from_tier = 0, to_tier = 0;
  std::size_t from_bs = 0, to_bs = 0;
};

struct Dwell {
  double start = 0.0;
  double end = 0.0;
  TierIndex tier = 0;
  std::size_t bs = 0;
  bool initial = false;   // the t = 0 cell, an S~ sample
  bool censored = false;  // cut off by the horizon
  double duration() const { return end - start; }
};

struct Replication {
  std::vector<HandoffEvent> events;
  std::vector<Dwell> dwells;  // tile [0, horizon]
  std::size_t skip_repairs = 0;       // coarse steps with a change the endpoints alone would miss
  std::size_t window_extensions = 0;  // guard doublings needed for this replication
};

Replication sweep_trajectory(const NetworkModel& net, const MobilityParams& mob,
                             const SimConfig& cfg, std::size_t replication);

struct SimSummary {
  std::uint64_t seed = 0;
  std::size_t replications = 0;
  double horizon = 0.0;

  std::vector<DistributionCurve> initial_ccdf;      // S~ by initial tier
  DistributionCurve network_initial_ccdf;           // S~ over all replications
  std::vector<DistributionCurve> sojourn_ccdf;      // S by tier
  DistributionCurve network_ccdf;                   // S pooled over tiers
  std::vector<DistributionCurve> stay_probability;  // P(BS(T) = BS(0)) by initial tier

  std::vector<double> handoff_rate, handoff_rate_se;
  std::vector<std::vector<double>> pair_rate, pair_rate_se;
  double total_handoff_rate = 0.0, total_handoff_rate_se = 0.0;
  std::vector<double> time_fraction, time_fraction_se;
  std::vector<double> mean_sojourn, mean_sojourn_se;
  double mean_sojourn_unconditional = 0.0, mean_sojourn_unconditional_se = 0.0;

  std::vector<std::size_t> initial_count;  // replications starting in tier k
  std::vector<std::size_t> dwell_count;    // complete interior dwells in tier k
  std::size_t skip_repairs = 0;
  std::size_t window_extensions = 0;
  std::vector<std::string> warnings;
};

// Complete interior dwells are weighted by horizon / (horizon - s): a dwell
// of length s fits inside the horizon with probability proportional to
// horizon - s, so the weights undo the bias against long dwells.
SimSummary estimate_curves(std::size_t tier_count, std::span<const Replication> reps,
                           std::span<const double> grid, double horizon);

struct TimeFractions {
  std::vector<double> fraction;
  std::vector<double> stderr_;
};

TimeFractions empirical_time_fractions(std::size_t tier_count, std::span<const Replication> reps);

// Runs every replication and aggregates in replication order, so the result
// does not depend on the thread count.
SimSummary simulate(const NetworkModel& net, const MobilityParams& mob, const SimConfig& cfg,
                    std::span<const double> grid, Execution exec = Execution::parallel);

}  // namespace sojourn::sim
