#include "sojourn/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "sojourn/numerics.hpp"

namespace sojourn {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kSupThreshold = 0.02;
constexpr double kZThreshold = 3.0;

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json units() {
  return {{"intensity", "1/m^2"},
          {"distance", "m"},
          {"time", "s"},
          {"velocity", "m/s"},
          {"note", "all quantities are consistent ratios; any unit system works if used throughout"}};
}

struct CurveEntry {
  std::string file;
  std::string quantity;
  json tier;  // 1-based, or "all"
  const DistributionCurve* curve;
};

std::string tier_file(const char* prefix, const char* quantity, TierIndex k) {
  return std::string(prefix) + "_" + quantity + "_tier" + std::to_string(k + 1) + ".csv";
}

json write_curves(const fs::path& dir, const std::vector<CurveEntry>& entries) {
  json list = json::array();
  for (const CurveEntry& e : entries) {
    // The stay probability may rise again after a return to BS(0).
    e.curve->validate(e.quantity == "stay_probability" ? 1.0 : 1e-6);
    write_curve_csv(dir / e.file, *e.curve);
    list.push_back({{"file", e.file},
                    {"quantity", e.quantity},
                    {"tier", e.tier},
                    {"kind", to_string(e.curve->kind)},
                    {"provenance", to_string(e.curve->provenance)},
                    {"points", e.curve->values.size()}});
  }
  return list;
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

std::vector<CurveEntry> analytic_entries(const analytic::AnalyticReport& r) {
  std::vector<CurveEntry> e;
  for (std::size_t k = 0; k < r.initial_ccdf.size(); ++k) {
    e.push_back({tier_file("analytic", "initial", k), "initial_sojourn", k + 1, &r.initial_ccdf[k]});
    e.push_back({tier_file("analytic", "sojourn", k), "sojourn", k + 1, &r.sojourn_ccdf[k]});
  }
  e.push_back({"analytic_initial_all.csv", "initial_sojourn", "all", &r.network_initial_ccdf});
  e.push_back({"analytic_sojourn_all.csv", "sojourn", "all", &r.network_ccdf});
  return e;
}

std::vector<CurveEntry> empirical_entries(const sim::SimSummary& s) {
  std::vector<CurveEntry> e;
  for (std::size_t k = 0; k < s.initial_ccdf.size(); ++k) {
    e.push_back({tier_file("empirical", "initial", k), "initial_sojourn", k + 1, &s.initial_ccdf[k]});
    e.push_back({tier_file("empirical", "sojourn", k), "sojourn", k + 1, &s.sojourn_ccdf[k]});
    e.push_back({tier_file("empirical", "stay", k), "stay_probability", k + 1, &s.stay_probability[k]});
  }
  e.push_back({"empirical_initial_all.csv", "initial_sojourn", "all", &s.network_initial_ccdf});
  e.push_back({"empirical_sojourn_all.csv", "sojourn", "all", &s.network_ccdf});
  return e;
}

json analytic_metrics_json(const analytic::MobilityMetrics& m) {
  json tiers = json::array();
  for (std::size_t k = 0; k < m.tiers.size(); ++k) {
    const auto& t = m.tiers[k];
    tiers.push_back({{"tier", k + 1},
                     {"association_prob", t.association_prob},
                     {"time_fraction", t.time_fraction},
                     {"mean_sojourn", t.mean_sojourn},
                     {"handoff_rate", t.handoff_rate},
                     {"effective_handoff_rate", t.effective_handoff_rate},
                     {"ping_pong_rate", t.ping_pong_rate}});
  }
  return {{"tiers", tiers},
          {"pair_rates", m.pair_rates},
          {"total_handoff_rate", m.total_handoff_rate},
          {"mean_sojourn", m.mean_sojourn_unconditional}};
}

json empirical_metrics_json(const sim::SimSummary& s) {
  json tiers = json::array();
  for (std::size_t k = 0; k < s.handoff_rate.size(); ++k) {
    tiers.push_back({{"tier", k + 1},
                     {"time_fraction", s.time_fraction[k]},
                     {"time_fraction_se", s.time_fraction_se[k]},
                     {"mean_sojourn", s.mean_sojourn[k]},
                     {"mean_sojourn_se", s.mean_sojourn_se[k]},
                     {"handoff_rate", s.handoff_rate[k]},
                     {"handoff_rate_se", s.handoff_rate_se[k]},
                     {"initial_count", s.initial_count[k]},
                     {"dwell_count", s.dwell_count[k]}});
  }
  return {{"tiers", tiers},
          {"pair_rates", s.pair_rate},
          {"pair_rates_se", s.pair_rate_se},
          {"total_handoff_rate", s.total_handoff_rate},
          {"total_handoff_rate_se", s.total_handoff_rate_se},
          {"mean_sojourn", s.mean_sojourn_unconditional},
          {"mean_sojourn_se", s.mean_sojourn_unconditional_se},
          {"replications", s.replications},
          {"horizon", s.horizon},
          {"seed", s.seed},
          {"skip_repairs", s.skip_repairs},
          {"window_extensions", s.window_extensions}};
}

json comparison_json(const Comparison& c) {
  json curves = json::array();
  for (const CurveCheck& cc : c.curves) {
    curves.push_back({{"name", cc.name},
                      {"sup_distance", cc.sup ? json(*cc.sup) : json(nullptr)},
                      {"threshold", cc.threshold},
                      {"passed", cc.passed}});
  }
  json metrics = json::array();
  for (const MetricCheck& m : c.metrics) {
    metrics.push_back({{"name", m.name},
                       {"analytic", m.analytic},
                       {"empirical", m.empirical},
                       {"stderr", m.stderr_},
                       {"z", finite_or_null(m.z)},
                       {"gating", m.gating},
                       {"passed", m.passed}});
  }
  json bounds = json::array();
  for (const UpperBoundCheck& u : c.upper_bound) {
    bounds.push_back({{"tier", u.tier + 1},
                      {"holds", u.holds},
                      {"equal_within_noise", u.equal_within_noise},
                      {"min_z", finite_or_null(u.min_z)},
                      {"max_z", finite_or_null(u.max_z)}});
  }
  return {{"verdict", c.pass ? "PASS" : "FAIL"},
          {"curves", curves},
          {"metrics", metrics},
          {"upper_bound", bounds}};
}

json base_manifest(const std::string& command, const Scenario& s, const std::vector<double>& grid) {
  return {{"command", command}, {"units", units()}, {"scenario", scenario_to_json(s)}, {"grid", grid}};
}

void print_analytic(std::ostream& out, const analytic::MobilityMetrics& m) {
  out << "tier  P(tier)     E[S|k]      H_k         H_k(TTT)    pingpong\n";
  for (std::size_t k = 0; k < m.tiers.size(); ++k) {
    const auto& t = m.tiers[k];
    out << std::left << std::setw(6) << k + 1 << std::setprecision(6) << std::setw(12)
        << t.association_prob << std::setw(12) << t.mean_sojourn << std::setw(12) << t.handoff_rate
        << std::setw(12) << t.effective_handoff_rate << t.ping_pong_rate << '\n';
  }
  out << "H = " << m.total_handoff_rate << ", E[S] = " << m.mean_sojourn_unconditional << '\n';
}

void print_empirical(std::ostream& out, const sim::SimSummary& s) {
  out << "tier  starts    dwells    H_k (se)                 E[S|k] (se)\n";
  for (std::size_t k = 0; k < s.handoff_rate.size(); ++k) {
    std::ostringstream h, m;
    h << std::setprecision(6) << s.handoff_rate[k] << " (" << s.handoff_rate_se[k] << ")";
    m << std::setprecision(6) << s.mean_sojourn[k] << " (" << s.mean_sojourn_se[k] << ")";
    out << std::left << std::setw(6) << k + 1 << std::setw(10) << s.initial_count[k] << std::setw(10)
        << s.dwell_count[k] << std::setw(25) << h.str() << m.str() << '\n';
  }
  out << "seed " << s.seed << ", " << s.replications << " replications, horizon " << s.horizon << '\n';
}

const SimulationSpec& require_simulation(const Scenario& s) {
  if (!s.simulation) throw ValidationError("scenario has no simulation block");
  return *s.simulation;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  if (r.ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, r.ptr);
}

void write_curve_csv(const fs::path& path, const DistributionCurve& curve) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const bool with_se = !curve.stderrs.empty();
  out << (with_se ? "T,value,stderr\n" : "T,value\n");
  for (std::size_t i = 0; i < curve.values.size(); ++i) {
    out << format_double(curve.abscissae[i]) << ',' << format_double(curve.values[i]);
    if (with_se) out << ',' << format_double(curve.stderrs[i]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

DistributionCurve read_curve_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  DistributionCurve c;
  bool with_se = false;
  if (line == "T,value,stderr") {
    with_se = true;
  } else if (line != "T,value") {
    throw std::runtime_error(path.string() + ": unexpected header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> fields;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p <= end) {
      double v = 0.0;
      const auto r = std::from_chars(p, end, v);
      if (r.ec != std::errc()) throw std::runtime_error(path.string() + ": bad number");
      fields.push_back(v);
      p = r.ptr + 1;
      if (r.ptr == end) break;
    }
    if (fields.size() != (with_se ? 3u : 2u)) throw std::runtime_error(path.string() + ": bad row");
    c.abscissae.push_back(fields[0]);
    c.values.push_back(fields[1]);
    if (with_se) c.stderrs.push_back(fields[2]);
  }
  return c;
}

Scenario prepare_scenario(const CommandOptions& opts) {
  if (!opts.scenario) throw ValidationError("--scenario is required");
  Scenario s = load_scenario(*opts.scenario);
  if (opts.out_dir) s.output_dir = *opts.out_dir;
  if (opts.grid) s.grid = parse_grid_option(*opts.grid);
  if (opts.seed) {
    if (!s.simulation) s.simulation = SimulationSpec{};
    s.simulation->seed = *opts.seed;
  }
  return s;
}

Comparison compare_results(const analytic::AnalyticReport& a, const sim::SimSummary& s) {
  Comparison c;
  auto curve = [&](std::string name, const DistributionCurve& an, const DistributionCurve& em) {
    CurveCheck cc;
    cc.name = std::move(name);
    cc.threshold = kSupThreshold;
    if (!em.values.empty()) {
      cc.sup = sup_distance(an, em);
      cc.passed = *cc.sup <= kSupThreshold;
    }
    c.curves.push_back(cc);
  };
  const std::size_t K = a.initial_ccdf.size();
  for (std::size_t k = 0; k < K; ++k) {
    curve("initial_sojourn tier " + std::to_string(k + 1), a.initial_ccdf[k], s.initial_ccdf[k]);
    curve("sojourn tier " + std::to_string(k + 1), a.sojourn_ccdf[k], s.sojourn_ccdf[k]);
  }
  curve("initial_sojourn all", a.network_initial_ccdf, s.network_initial_ccdf);
  curve("sojourn all", a.network_ccdf, s.network_ccdf);

  auto metric = [&](std::string name, double an, double em, double se, bool gating) {
    MetricCheck m{std::move(name), an, em, se, 0.0, gating, true};
    if (se > 0.0) {
      m.z = (em - an) / se;
    } else {
      m.z = em == an ? 0.0 : std::numeric_limits<double>::infinity();
    }
    m.passed = std::abs(m.z) <= kZThreshold;
    c.metrics.push_back(m);
  };
  const auto& am = a.metrics;
  for (std::size_t k = 0; k < K; ++k) {
    const std::string t = " tier " + std::to_string(k + 1);
    metric("handoff_rate" + t, am.tiers[k].handoff_rate, s.handoff_rate[k], s.handoff_rate_se[k], true);
    metric("time_fraction" + t, am.tiers[k].time_fraction, s.time_fraction[k], s.time_fraction_se[k], false);
    metric("mean_sojourn" + t, am.tiers[k].mean_sojourn, s.mean_sojourn[k], s.mean_sojourn_se[k], false);
  }
  metric("total_handoff_rate", am.total_handoff_rate, s.total_handoff_rate, s.total_handoff_rate_se, false);
  metric("mean_sojourn all", am.mean_sojourn_unconditional, s.mean_sojourn_unconditional,
         s.mean_sojourn_unconditional_se, false);

  for (std::size_t k = 0; k < K; ++k) {
    UpperBoundCheck u;
    u.tier = k;
    const DistributionCurve& stay = s.stay_probability[k];
    if (!stay.values.empty()) {
      // With n samples a zero-variance estimate still carries 1/n of
      // resolution, so the band never collapses to nothing.
      const double floor = 1.0 / static_cast<double>(s.initial_count[k]);
      u.holds = true;
      u.equal_within_noise = true;
      u.min_z = std::numeric_limits<double>::infinity();
      u.max_z = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < stay.values.size(); ++i) {
        const double scale = std::max(stay.stderrs[i], floor);
        const double z = (stay.values[i] - a.initial_ccdf[k].values[i]) / scale;
        u.min_z = std::min(u.min_z, z);
        u.max_z = std::max(u.max_z, z);
        if (z < -kZThreshold) u.holds = false;
        if (std::abs(z) > kZThreshold) u.equal_within_noise = false;
      }
    }
    c.upper_bound.push_back(u);
  }

  c.pass = true;
  for (const CurveCheck& cc : c.curves) c.pass = c.pass && cc.passed;
  for (const MetricCheck& m : c.metrics) c.pass = c.pass && (!m.gating || m.passed);
  for (const UpperBoundCheck& u : c.upper_bound) c.pass = c.pass && u.holds;
  return c;
}

AnalyzeResult cmd_analyze(const Scenario& s, const fs::path& out_dir, Execution exec) {
  AnalyzeResult r;
  r.grid = resolve_grid(s.grid, s.network, s.mobility);
  r.report = analytic::aggregate_metrics(s.network, s.mobility, r.grid, {}, exec);
  fs::create_directories(out_dir);
  json manifest = base_manifest("analyze", s, r.grid);
  manifest["curves"] = write_curves(out_dir, analytic_entries(r.report));
  manifest["metrics_file"] = "metrics.json";
  manifest["numeric_fallback_evaluations"] = r.report.fallback_evaluations;
  write_json(out_dir / "metrics.json", {{"analytic", analytic_metrics_json(r.report.metrics)}});
  write_json(out_dir / "manifest.json", manifest);
  return r;
}

SimulateResult cmd_simulate(const Scenario& s, const fs::path& out_dir, Execution exec) {
  SimulateResult r;
  r.config = resolve_sim_config(require_simulation(s), s.network, s.mobility);
  r.grid = resolve_grid(s.grid, s.network, s.mobility);
  r.summary = sim::simulate(s.network, s.mobility, r.config, r.grid, exec);
  fs::create_directories(out_dir);
  json manifest = base_manifest("simulate", s, r.grid);
  manifest["seed"] = r.summary.seed;
  manifest["curves"] = write_curves(out_dir, empirical_entries(r.summary));
  manifest["metrics_file"] = "metrics.json";
  manifest["warnings"] = r.summary.warnings;
  write_json(out_dir / "metrics.json", {{"empirical", empirical_metrics_json(r.summary)}});
  write_json(out_dir / "manifest.json", manifest);
  return r;
}

CompareResult cmd_compare(const Scenario& s, const fs::path& out_dir, Execution exec) {
  CompareResult r;
  r.simulation.config = resolve_sim_config(require_simulation(s), s.network, s.mobility);
  const auto grid = resolve_grid(s.grid, s.network, s.mobility);
  r.analytic.grid = grid;
  r.simulation.grid = grid;
  r.analytic.report = analytic::aggregate_metrics(s.network, s.mobility, grid, {}, exec);
  r.simulation.summary = sim::simulate(s.network, s.mobility, r.simulation.config, grid, exec);
  r.comparison = compare_results(r.analytic.report, r.simulation.summary);

  fs::create_directories(out_dir);
  json manifest = base_manifest("compare", s, grid);
  manifest["seed"] = r.simulation.summary.seed;
  json curves = write_curves(out_dir, analytic_entries(r.analytic.report));
  for (auto& e : write_curves(out_dir, empirical_entries(r.simulation.summary))) curves.push_back(e);
  manifest["curves"] = curves;
  manifest["metrics_file"] = "metrics.json";
  manifest["numeric_fallback_evaluations"] = r.analytic.report.fallback_evaluations;
  manifest["warnings"] = r.simulation.summary.warnings;
  manifest["verdict"] = r.comparison.pass ? "PASS" : "FAIL";
  write_json(out_dir / "metrics.json", {{"analytic", analytic_metrics_json(r.analytic.report.metrics)},
                                        {"empirical", empirical_metrics_json(r.simulation.summary)},
                                        {"comparison", comparison_json(r.comparison)}});
  write_json(out_dir / "manifest.json", manifest);
  return r;
}

std::vector<IdentityCheck> cmd_validate() { return run_identity_suite(); }

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ValidationError*>(&e)) return exit_code::validation;
  if (dynamic_cast<const numerics::QuadratureError*>(&e)) return exit_code::quadrature;
  if (dynamic_cast<const sim::SimulatorError*>(&e)) return exit_code::simulator;
  if (dynamic_cast<const std::invalid_argument*>(&e)) return exit_code::validation;
  return exit_code::verdict_fail;
}

int run_command(const std::string& command, const CommandOptions& opts, std::ostream& out,
                std::ostream& err) {
  try {
    if (command == "validate") {
      const auto checks = cmd_validate();
      bool ok = true;
      for (const IdentityCheck& c : checks) {
        out << (c.passed() ? "ok    " : "FAIL  ") << c.name << "  error " << c.error << " (tol "
            << c.tolerance << ")\n";
        ok = ok && c.passed();
      }
      return ok ? exit_code::ok : exit_code::identity;
    }
    if (command != "analyze" && command != "simulate" && command != "compare") {
      throw ValidationError("unknown command '" + command + "'");
    }
    const Scenario s = prepare_scenario(opts);
    const fs::path dir = s.output_dir;
    if (command == "analyze") {
      const auto r = cmd_analyze(s, dir, opts.exec);
      print_analytic(out, r.report.metrics);
      if (r.report.fallback_evaluations > 0) {
        err << "note: " << r.report.fallback_evaluations
            << " swept-area derivative evaluations used the finite-difference fallback\n";
      }
    } else if (command == "simulate") {
      const auto r = cmd_simulate(s, dir, opts.exec);
      print_empirical(out, r.summary);
      for (const auto& w : r.summary.warnings) err << "warning: " << w << '\n';
    } else {
      const auto r = cmd_compare(s, dir, opts.exec);
      print_analytic(out, r.analytic.report.metrics);
      print_empirical(out, r.simulation.summary);
      for (const auto& w : r.simulation.summary.warnings) err << "warning: " << w << '\n';
      for (const CurveCheck& c : r.comparison.curves) {
        out << (c.passed ? "ok    " : "FAIL  ") << "sup " << c.name << " = "
            << (c.sup ? format_double(*c.sup) : std::string("n/a")) << '\n';
      }
      for (const MetricCheck& m : r.comparison.metrics) {
        if (m.gating) out << (m.passed ? "ok    " : "FAIL  ") << "z " << m.name << " = " << m.z << '\n';
      }
      for (const UpperBoundCheck& u : r.comparison.upper_bound) {
        out << (u.holds ? "ok    " : "FAIL  ") << "upper bound tier " << u.tier + 1 << " (min z " << u.min_z
            << (u.equal_within_noise ? ", equal within noise)" : ", strict gap)") << '\n';
      }
      out << "verdict " << (r.comparison.pass ? "PASS" : "FAIL") << '\n';
      if (!r.comparison.pass) return exit_code::verdict_fail;
    }
    out << "wrote " << dir.string() << '\n';
    return exit_code::ok;
  } catch (const std::exception& e) {
    const int code = exit_code_for(e);
    const char* kind = code == exit_code::quadrature  ? "quadrature error"
                       : code == exit_code::simulator ? "simulator error"
                                                      : "error";
    err << kind << ": " << e.what() << '\n';
    return code;
  }
}

}  // namespace sojourn
