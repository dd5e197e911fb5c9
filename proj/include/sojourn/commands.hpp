#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sojourn/analytic.hpp"
#include "sojourn/curve.hpp"
#include "sojourn/execution.hpp"
#include "sojourn/identities.hpp"
#include "sojourn/scenario.hpp"
#include "sojourn/simulation.hpp"

namespace sojourn {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int verdict_fail = 1;  // compare ran, verdict FAIL; also unexpected errors
inline constexpr int validation = 2;
inline constexpr int quadrature = 3;
inline constexpr int simulator = 4;
inline constexpr int identity = 5;
}  // namespace exit_code

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

// Header `T,value` or `T,value,stderr`; LF line endings.
void write_curve_csv(const std::filesystem::path& path, const DistributionCurve& curve);
DistributionCurve read_curve_csv(const std::filesystem::path& path);

struct CommandOptions {
  std::optional<std::string> scenario;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> grid;  // a:b:n
  Execution exec = Execution::parallel;
};

// Loads the scenario and applies the command-line overrides.
Scenario prepare_scenario(const CommandOptions& opts);

struct CurveCheck {
  std::string name;
  std::optional<double> sup;  // empty when the empirical curve has no samples
  double threshold = 0.02;
  bool passed = false;
};

struct MetricCheck {
  std::string name;
  double analytic = 0.0;
  double empirical = 0.0;
  double stderr_ = 0.0;
  double z = 0.0;
  bool gating = false;  // part of the verdict
  bool passed = true;
};

// Analytic S~ CCDF against the empirical P(BS(T) = BS(0)) of one tier.
struct UpperBoundCheck {
  TierIndex tier = 0;
  bool holds = false;               // analytic <= empirical + max(3 se, 3 / n) everywhere
  bool equal_within_noise = false;  // |analytic - empirical| within the same band everywhere
  double min_z = 0.0;               // min over T of (empirical - analytic) / max(se, 1 / n)
  double max_z = 0.0;
};

struct Comparison {
  std::vector<CurveCheck> curves;
  std::vector<MetricCheck> metrics;
  std::vector<UpperBoundCheck> upper_bound;
  bool pass = false;
};

Comparison compare_results(const analytic::AnalyticReport& a, const sim::SimSummary& s);

struct AnalyzeResult {
  std::vector<double> grid;
  analytic::AnalyticReport report;
};

struct SimulateResult {
  std::vector<double> grid;
  sim::SimConfig config;
  sim::SimSummary summary;
};

struct CompareResult {
  AnalyzeResult analytic;
  SimulateResult simulation;
  Comparison comparison;
};

// Each writes its curves, metrics.json and manifest.json into `out_dir`.
AnalyzeResult cmd_analyze(const Scenario& s, const std::filesystem::path& out_dir,
                          Execution exec = Execution::parallel);
SimulateResult cmd_simulate(const Scenario& s, const std::filesystem::path& out_dir,
                            Execution exec = Execution::parallel);
CompareResult cmd_compare(const Scenario& s, const std::filesystem::path& out_dir,
                          Execution exec = Execution::parallel);
std::vector<IdentityCheck> cmd_validate();

// Exit code for an exception escaping a command.
int exit_code_for(const std::exception& e);

// Dispatch for the CLI: runs `command`, prints a summary to `out` and
// diagnostics to `err`, and maps failures onto the exit-code contract.
int run_command(const std::string& command, const CommandOptions& opts, std::ostream& out,
                std::ostream& err);

}  // namespace sojourn
