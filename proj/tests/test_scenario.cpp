#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "sojourn/commands.hpp"

using namespace sojourn;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json minimal() {
  return json::parse(R"({"network": {"alpha": 4, "tiers": [{"intensity": 0.01}]},
                         "mobility": {"velocity": 5}})");
}

std::string error_of(const json& doc) {
  try {
    parse_scenario(doc);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sojourn_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path write_scenario(const fs::path& dir, const json& doc) {
  const fs::path p = dir / "scenario.json";
  std::ofstream(p) << doc.dump(2);
  return p;
}

}  // namespace

TEST(Scenario, MinimalDefaults) {
  const Scenario s = parse_scenario(minimal());
  EXPECT_EQ(s.network.tier_count(), 1u);
  EXPECT_EQ(s.network.tier(0).power, 1.0);
  EXPECT_EQ(s.network.tier(0).bias, 1.0);
  EXPECT_EQ(s.mobility.ttt, 0.0);
  EXPECT_EQ(s.mobility.t_p, 0.0);
  EXPECT_EQ(s.grid.mode, GridSpec::Mode::automatic);
  EXPECT_FALSE(s.simulation.has_value());
  EXPECT_EQ(s.output_dir, "out");
}

TEST(Scenario, ShippedFilesLoad) {
  for (const char* name : {"two_tier.json", "three_tier.json", "single_tier.json"}) {
    const Scenario s = load_scenario(std::string(SOJOURN_SCENARIO_DIR) + "/" + name);
    ASSERT_TRUE(s.simulation.has_value()) << name;
    EXPECT_EQ(s.simulation->seed, 1u);
  }
  const Scenario three = load_scenario(std::string(SOJOURN_SCENARIO_DIR) + "/three_tier.json");
  EXPECT_EQ(three.network.tier_count(), 3u);
  EXPECT_EQ(three.network.tier(2).power, 100.0);
}

TEST(Scenario, RejectsBadInput) {
  json doc = minimal();
  doc["network"]["alpha"] = 2;
  EXPECT_NE(error_of(doc).find("alpha"), std::string::npos);

  doc = minimal();
  doc["network"]["tiers"][0]["powr"] = 2;
  EXPECT_NE(error_of(doc).find("network.tiers[0].powr: unknown key"), std::string::npos);

  doc = minimal();
  doc["extra"] = 1;
  EXPECT_NE(error_of(doc).find("unknown key"), std::string::npos);

  doc = minimal();
  doc["mobility"]["velocity"] = "fast";
  EXPECT_NE(error_of(doc).find("mobility.velocity"), std::string::npos);

  doc = minimal();
  doc["mobility"]["ttt"] = 1.0;
  doc["mobility"]["t_p"] = 0.5;
  EXPECT_FALSE(error_of(doc).empty());

  doc = minimal();
  doc["simulation"] = {{"replications", 0}};
  EXPECT_FALSE(error_of(doc).empty());

  doc = minimal();
  doc["simulation"] = {{"seed", -1}};
  EXPECT_NE(error_of(doc).find("simulation.seed"), std::string::npos);

  doc = minimal();
  doc.erase("mobility");
  EXPECT_NE(error_of(doc).find("mobility"), std::string::npos);

  EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), ValidationError);
}

TEST(Scenario, GridForms) {
  const NetworkModel net({{0.01, 1.0, 1.0}}, 4.0);
  const MobilityParams mob{5.0, 0.0, 0.0};
  json doc = minimal();
  doc["analysis"] = {{"grid", {0.5, 1.0, 2.0}}};
  Scenario s = parse_scenario(doc);
  EXPECT_EQ(resolve_grid(s.grid, net, mob), (std::vector<double>{0.5, 1.0, 2.0}));

  doc["analysis"] = {{"grid", {{"start", 1.0}, {"stop", 100.0}, {"count", 3}}}};
  s = parse_scenario(doc);
  const auto g = resolve_grid(s.grid, net, mob);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_NEAR(g[1], 10.0, 1e-12);

  doc["analysis"] = {{"grid", {{"start", 0.0}, {"stop", 2.0}, {"count", 5}, {"spacing", "linear"}}}};
  s = parse_scenario(doc);
  EXPECT_EQ(resolve_grid(s.grid, net, mob), (std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0}));

  doc["analysis"] = {{"grid", {2.0, 1.0}}};
  EXPECT_FALSE(error_of(doc).empty());
  doc["analysis"] = {{"grid", {{"start", 0.0}, {"stop", 2.0}, {"count", 5}}}};
  EXPECT_FALSE(error_of(doc).empty());  // log spacing needs start > 0

  doc["analysis"] = {{"grid", "auto"}};
  s = parse_scenario(doc);
  EXPECT_EQ(resolve_grid(s.grid, net, mob).size(), 60u);
}

TEST(Scenario, GridOption) {
  const GridSpec g = parse_grid_option("0:5:11");
  const NetworkModel net({{0.01, 1.0, 1.0}}, 4.0);
  const auto v = resolve_grid(g, net, {5.0, 0.0, 0.0});
  ASSERT_EQ(v.size(), 11u);
  EXPECT_EQ(v.front(), 0.0);
  EXPECT_EQ(v.back(), 5.0);
  EXPECT_NEAR(v[3], 1.5, 1e-15);
  for (const char* bad : {"1:2", "a:2:3", "0:5:1", "5:0:4", "0:5:3:1", "0:5:x"}) {
    EXPECT_THROW(parse_grid_option(bad), ValidationError) << bad;
  }
}

TEST(Scenario, RoundTripThroughJson) {
  json doc = json::parse(R"({"network": {"alpha": 3.5, "tiers": [{"intensity": 0.002, "power": 3, "bias": 2},
                                                                {"intensity": 0.004}]},
                             "mobility": {"velocity": 2, "ttt": 0.1, "t_p": 0.4},
                             "analysis": {"grid": [0.1, 0.2]},
                             "simulation": {"seed": 9, "replications": 10, "horizon": 50},
                             "output": {"dir": "somewhere"}})");
  const Scenario a = parse_scenario(doc);
  const Scenario b = parse_scenario(scenario_to_json(a));
  EXPECT_EQ(scenario_to_json(a), scenario_to_json(b));
  EXPECT_EQ(b.network.tier(0).bias, 2.0);
  EXPECT_EQ(*b.simulation->horizon, 50.0);
  EXPECT_EQ(b.output_dir, "somewhere");
}

TEST(Csv, ExactRoundTrip) {
  const fs::path dir = scratch("csv");
  DistributionCurve c;
  c.abscissae = {0.0, 0.1, 1.0 / 3.0, 1e-300, 12345.678901234567};
  c.values = {1.0, 0.9999999999999999, 2.0 / 3.0, 5e-324, 0.0};
  c.stderrs = {0.0, 1e-17, 0.1, 0.2, 0.3};
  write_curve_csv(dir / "c.csv", c);
  const DistributionCurve r = read_curve_csv(dir / "c.csv");
  EXPECT_EQ(r.abscissae, c.abscissae);
  EXPECT_EQ(r.values, c.values);
  EXPECT_EQ(r.stderrs, c.stderrs);
  const std::string text = slurp(dir / "c.csv");
  EXPECT_EQ(text.substr(0, 15), "T,value,stderr\n");
  EXPECT_EQ(text.find('\r'), std::string::npos);

  c.stderrs.clear();
  write_curve_csv(dir / "d.csv", c);
  EXPECT_EQ(slurp(dir / "d.csv").substr(0, 8), "T,value\n");
  EXPECT_TRUE(read_curve_csv(dir / "d.csv").stderrs.empty());
  EXPECT_EQ(format_double(0.1), "0.1");
}

TEST(Commands, AnalyzeWritesCurvesAndManifest) {
  const fs::path dir = scratch("analyze");
  CommandOptions opts;
  opts.scenario = std::string(SOJOURN_SCENARIO_DIR) + "/single_tier.json";
  opts.out_dir = dir.string();
  opts.grid = "0:5:11";
  std::ostringstream out, err;
  ASSERT_EQ(run_command("analyze", opts, out, err), exit_code::ok) << err.str();
  for (const char* f : {"analytic_initial_tier1.csv", "analytic_sojourn_tier1.csv", "analytic_initial_all.csv",
                        "analytic_sojourn_all.csv", "metrics.json", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const DistributionCurve s = read_curve_csv(dir / "analytic_sojourn_tier1.csv");
  ASSERT_EQ(s.values.size(), 11u);
  EXPECT_EQ(s.values.front(), 1.0);
  const json manifest = json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest["command"], "analyze");
  EXPECT_EQ(manifest["grid"].size(), 11u);
  EXPECT_EQ(manifest["units"]["time"], "s");
  EXPECT_EQ(manifest["curves"].size(), 4u);
  EXPECT_EQ(manifest["numeric_fallback_evaluations"], 0);
  const json metrics = json::parse(slurp(dir / "metrics.json"));
  EXPECT_NEAR(metrics["analytic"]["mean_sojourn"].get<double>(), 1.5708, 1e-4);
  EXPECT_NEAR(metrics["analytic"]["total_handoff_rate"].get<double>(), 0.6366, 1e-4);
}

TEST(Commands, SimulateIsReproducible) {
  const fs::path dir = scratch("simulate");
  json doc = minimal();
  doc["analysis"] = {{"grid", {0.2, 1.0, 3.0}}};
  doc["simulation"] = {{"seed", 1}, {"replications", 40}};
  const fs::path scenario = write_scenario(dir, doc);
  CommandOptions opts;
  opts.scenario = scenario.string();
  std::ostringstream out, err;
  opts.out_dir = (dir / "a").string();
  ASSERT_EQ(run_command("simulate", opts, out, err), exit_code::ok) << err.str();
  opts.out_dir = (dir / "b").string();
  opts.exec = Execution::serial;
  ASSERT_EQ(run_command("simulate", opts, out, err), exit_code::ok) << err.str();
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    if (entry.path().filename() == "manifest.json") continue;  // records its own out dir
    EXPECT_EQ(slurp(entry.path()), slurp(dir / "b" / entry.path().filename())) << entry.path();
  }
  EXPECT_TRUE(fs::exists(dir / "a" / "empirical_stay_tier1.csv"));
  EXPECT_EQ(read_curve_csv(dir / "a" / "empirical_initial_tier1.csv").stderrs.size(), 3u);

  opts.seed = 2;
  opts.out_dir = (dir / "c").string();
  ASSERT_EQ(run_command("simulate", opts, out, err), exit_code::ok);
  EXPECT_NE(slurp(dir / "a" / "metrics.json"), slurp(dir / "c" / "metrics.json"));
}

TEST(Commands, SingleReplicationWarns) {
  const fs::path dir = scratch("warn");
  json doc = minimal();
  doc["analysis"] = {{"grid", {0.5}}};
  doc["simulation"] = {{"replications", 1}};
  CommandOptions opts;
  opts.scenario = write_scenario(dir, doc).string();
  opts.out_dir = (dir / "out").string();
  std::ostringstream out, err;
  ASSERT_EQ(run_command("simulate", opts, out, err), exit_code::ok);
  EXPECT_NE(err.str().find("warning"), std::string::npos);
  const json manifest = json::parse(slurp(dir / "out" / "manifest.json"));
  EXPECT_FALSE(manifest["warnings"].empty());
}

TEST(Commands, ExitCodes) {
  EXPECT_EQ(exit_code_for(ValidationError("x")), exit_code::validation);
  EXPECT_EQ(exit_code_for(numerics::QuadratureError("x")), exit_code::quadrature);
  EXPECT_EQ(exit_code_for(sim::SimulatorError("x")), exit_code::simulator);
  EXPECT_EQ(exit_code_for(std::runtime_error("x")), exit_code::verdict_fail);

  const fs::path dir = scratch("codes");
  std::ostringstream out, err;
  CommandOptions opts;
  json bad = minimal();
  bad["network"]["alpha"] = 2;
  opts.scenario = write_scenario(dir, bad).string();
  EXPECT_EQ(run_command("analyze", opts, out, err), exit_code::validation);
  EXPECT_NE(err.str().find("alpha must be > 2"), std::string::npos);

  json tiny = minimal();
  tiny["analysis"] = {{"grid", {0.5}}};
  tiny["simulation"] = {{"replications", 2}, {"crossing_tol", 1e-30}};
  opts.scenario = write_scenario(dir, tiny).string();
  opts.out_dir = (dir / "o").string();
  EXPECT_EQ(run_command("simulate", opts, out, err), exit_code::simulator);

  // simulate without a simulation block
  opts.scenario = write_scenario(dir, minimal()).string();
  EXPECT_EQ(run_command("simulate", opts, out, err), exit_code::validation);
  EXPECT_EQ(run_command("bogus", opts, out, err), exit_code::validation);
  CommandOptions none;
  EXPECT_EQ(run_command("analyze", none, out, err), exit_code::validation);
}

TEST(Commands, ValidatePasses) {
  std::ostringstream out, err;
  EXPECT_EQ(run_command("validate", {}, out, err), exit_code::ok) << out.str();
  EXPECT_EQ(out.str().find("FAIL"), std::string::npos);
}

TEST(Commands, CorruptedBetaFailsCompare) {
  // analytic side computed with every B*P inverted, as if the exponent sign were flipped
  const Scenario s = load_scenario(std::string(SOJOURN_SCENARIO_DIR) + "/three_tier.json");
  std::vector<TierParams> flipped = s.network.tiers();
  for (TierParams& t : flipped) t.power = 1.0 / t.power;
  const NetworkModel wrong(flipped, s.network.alpha());
  const std::vector<double> grid = log_spaced(0.05, 5.0, 8);
  sim::SimConfig cfg = resolve_sim_config(*s.simulation, s.network, s.mobility);
  cfg.replications = 400;
  const sim::SimSummary sim = sim::simulate(s.network, s.mobility, cfg, grid);
  const Comparison bad = compare_results(analytic::aggregate_metrics(wrong, s.mobility, grid), sim);
  EXPECT_FALSE(bad.pass);
  double worst = 0.0;
  for (const CurveCheck& c : bad.curves) {
    if (c.sup) worst = std::max(worst, *c.sup);
  }
  EXPECT_GT(worst, 0.1);
  RecordProperty("worst_sup", std::to_string(worst));
}
