#include <benchmark/benchmark.h>

#include <numbers>
#include <vector>

#include "sojourn/analytic.hpp"
#include "sojourn/network.hpp"
#include "sojourn/simulation.hpp"
#include "sojourn/swept_geometry.hpp"

using namespace sojourn;

namespace {

Execution mode(const benchmark::State& st) { return st.range(0) ? Execution::parallel : Execution::serial; }

const NetworkModel& two_tier() {
  static const NetworkModel net({{0.002, 1.0, 1.0}, {0.005, 2.0, 1.0}}, 4.0);
  return net;
}

void BM_RasterOracle(benchmark::State& st) {
  const geometry::SweptDiscQuery q{20.0, std::numbers::pi / 3.0, 40.0, 1.2};
  for (auto _ : st) benchmark::DoNotOptimize(geometry::swept_area_oracle(q, 2048, 4096, mode(st)).area);
}

void BM_AggregateMetrics(benchmark::State& st) {
  const MobilityParams mob{5.0, 0.2, 0.5};
  const std::vector<double> grid = analytic::default_time_grid(two_tier(), mob);
  for (auto _ : st) {
    benchmark::DoNotOptimize(analytic::aggregate_metrics(two_tier(), mob, grid, {}, mode(st)).fallback_evaluations);
  }
}

void BM_Simulate(benchmark::State& st) {
  const MobilityParams mob{5.0, 0.0, 0.0};
  sim::SimConfig cfg;
  cfg.replications = 200;
  cfg.horizon = sim::default_horizon(two_tier(), mob);
  const std::vector<double> grid{0.5, 1.0, 2.0, 5.0};
  for (auto _ : st) benchmark::DoNotOptimize(sim::simulate(two_tier(), mob, cfg, grid, mode(st)).total_handoff_rate);
}

}  // namespace

// arg 0 = serial reference, 1 = OpenMP
BENCHMARK(BM_RasterOracle)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AggregateMetrics)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Simulate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
