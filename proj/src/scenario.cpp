#include "sojourn/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <string_view>

#include "sojourn/analytic.hpp"
#include "sojourn/curve.hpp"

namespace sojourn {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError(path + ": " + what);
}

void check_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

void check_keys(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
  check_object(j, path);
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      fail(path + "." + item.key(), "unknown key");
    }
  }
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "must be finite");
  return v;
}

double number_or(const json& obj, const char* key, const std::string& path, double fallback) {
  return obj.contains(key) ? number(obj.at(key), path + "." + key) : fallback;
}

std::uint64_t unsigned_integer(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) {
    if (j.get<std::int64_t>() < 0) fail(path, "must be >= 0");
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  }
  fail(path, "expected a non-negative integer");
}

GridSpec parse_grid(const json& j, const std::string& path) {
  GridSpec g;
  if (j.is_string()) {
    if (j.get<std::string>() != "auto") fail(path, "expected \"auto\", an object or a list");
    return g;
  }
  if (j.is_array()) {
    g.mode = GridSpec::Mode::list;
    for (std::size_t i = 0; i < j.size(); ++i) {
      g.values.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    }
    if (g.values.empty()) fail(path, "empty list");
    for (std::size_t i = 0; i < g.values.size(); ++i) {
      if (g.values[i] < 0.0) fail(path, "times must be >= 0");
      if (i > 0 && !(g.values[i] > g.values[i - 1])) fail(path, "times must be strictly increasing");
    }
    return g;
  }
  check_keys(j, path, {"start", "stop", "count", "spacing"});
  for (const char* key : {"start", "stop", "count"}) {
    if (!j.contains(key)) fail(path + "." + key, "missing");
  }
  g.start = number(j.at("start"), path + ".start");
  g.stop = number(j.at("stop"), path + ".stop");
  g.count = static_cast<std::size_t>(unsigned_integer(j.at("count"), path + ".count"));
  g.mode = GridSpec::Mode::log;
  if (j.contains("spacing")) {
    const json& s = j.at("spacing");
    if (!s.is_string() || (s != "log" && s != "linear")) fail(path + ".spacing", "expected \"log\" or \"linear\"");
    if (s == "linear") g.mode = GridSpec::Mode::linear;
  }
  if (g.count < 2) fail(path + ".count", "must be >= 2");
  if (!(g.stop > g.start)) fail(path, "stop must exceed start");
  if (g.start < 0.0) fail(path + ".start", "must be >= 0");
  if (g.mode == GridSpec::Mode::log && !(g.start > 0.0)) fail(path + ".start", "must be > 0 for log spacing");
  return g;
}

SimulationSpec parse_simulation(const json& j, const std::string& path) {
  check_keys(j, path, {"seed", "replications", "horizon", "guard_epsilon", "crossing_tol"});
  SimulationSpec s;
  if (j.contains("seed")) s.seed = unsigned_integer(j.at("seed"), path + ".seed");
  if (j.contains("replications")) {
    s.replications = static_cast<std::size_t>(unsigned_integer(j.at("replications"), path + ".replications"));
  }
  if (j.contains("horizon")) {
    const json& h = j.at("horizon");
    if (h.is_string()) {
      if (h != "auto") fail(path + ".horizon", "expected \"auto\" or a number");
    } else {
      s.horizon = number(h, path + ".horizon");
    }
  }
  s.guard_epsilon = number_or(j, "guard_epsilon", path, s.guard_epsilon);
  s.crossing_tol = number_or(j, "crossing_tol", path, s.crossing_tol);
  // Reuse the simulator's own invariant checks with a placeholder horizon.
  sim::SimConfig probe;
  probe.seed = s.seed;
  probe.replications = s.replications;
  probe.horizon = s.horizon.value_or(1.0);
  probe.guard_epsilon = s.guard_epsilon;
  probe.crossing_tol = s.crossing_tol;
  probe.validate();
  return s;
}

}  // namespace

Scenario parse_scenario(const json& doc) {
  check_keys(doc, "scenario", {"network", "mobility", "analysis", "simulation", "output"});
  if (!doc.contains("network")) fail("network", "missing");
  if (!doc.contains("mobility")) fail("mobility", "missing");

  const json& n = doc.at("network");
  check_keys(n, "network", {"alpha", "tiers"});
  if (!n.contains("alpha")) fail("network.alpha", "missing");
  if (!n.contains("tiers") || !n.at("tiers").is_array()) fail("network.tiers", "expected a list");
  std::vector<TierParams> tiers;
  for (std::size_t i = 0; i < n.at("tiers").size(); ++i) {
    const std::string path = "network.tiers[" + std::to_string(i) + "]";
    const json& t = n.at("tiers")[i];
    check_keys(t, path, {"intensity", "power", "bias"});
    if (!t.contains("intensity")) fail(path + ".intensity", "missing");
    tiers.push_back({number(t.at("intensity"), path + ".intensity"), number_or(t, "power", path, 1.0),
                     number_or(t, "bias", path, 1.0)});
  }
  NetworkModel net(std::move(tiers), number(n.at("alpha"), "network.alpha"));

  const json& m = doc.at("mobility");
  check_keys(m, "mobility", {"velocity", "ttt", "t_p"});
  if (!m.contains("velocity")) fail("mobility.velocity", "missing");
  MobilityParams mob{number(m.at("velocity"), "mobility.velocity"), number_or(m, "ttt", "mobility", 0.0),
                     number_or(m, "t_p", "mobility", 0.0)};
  mob.validate();

  Scenario s{std::move(net), mob, {}, std::nullopt, "out"};
  if (doc.contains("analysis")) {
    const json& a = doc.at("analysis");
    check_keys(a, "analysis", {"grid"});
    if (a.contains("grid")) s.grid = parse_grid(a.at("grid"), "analysis.grid");
  }
  if (doc.contains("simulation")) s.simulation = parse_simulation(doc.at("simulation"), "simulation");
  if (doc.contains("output")) {
    const json& o = doc.at("output");
    check_keys(o, "output", {"dir"});
    if (o.contains("dir")) {
      if (!o.at("dir").is_string() || o.at("dir").get<std::string>().empty()) {
        fail("output.dir", "expected a non-empty string");
      }
      s.output_dir = o.at("dir").get<std::string>();
    }
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("scenario " + path + ": " + e.what());
  }
  return parse_scenario(doc);
}

GridSpec parse_grid_option(const std::string& text) {
  const auto c1 = text.find(':');
  const auto c2 = c1 == std::string::npos ? c1 : text.find(':', c1 + 1);
  if (c2 == std::string::npos || text.find(':', c2 + 1) != std::string::npos) {
    throw ValidationError("--grid: expected a:b:n");
  }
  auto parse_double = [&](std::string_view part) {
    double v = 0.0;
    const auto r = std::from_chars(part.data(), part.data() + part.size(), v);
    if (r.ec != std::errc() || r.ptr != part.data() + part.size() || !std::isfinite(v)) {
      throw ValidationError("--grid: bad number '" + std::string(part) + "'");
    }
    return v;
  };
  const std::string_view all(text);
  GridSpec g;
  g.mode = GridSpec::Mode::linear;
  g.start = parse_double(all.substr(0, c1));
  g.stop = parse_double(all.substr(c1 + 1, c2 - c1 - 1));
  const std::string_view n = all.substr(c2 + 1);
  unsigned long long count = 0;
  const auto r = std::from_chars(n.data(), n.data() + n.size(), count);
  if (r.ec != std::errc() || r.ptr != n.data() + n.size()) throw ValidationError("--grid: bad count");
  g.count = static_cast<std::size_t>(count);
  if (g.count < 2) throw ValidationError("--grid: count must be >= 2");
  if (g.start < 0.0 || !(g.stop > g.start)) throw ValidationError("--grid: need 0 <= a < b");
  return g;
}

std::vector<double> resolve_grid(const GridSpec& grid, const NetworkModel& net,
                                 const MobilityParams& mob) {
  switch (grid.mode) {
    case GridSpec::Mode::automatic: return analytic::default_time_grid(net, mob);
    case GridSpec::Mode::linear: return linear_spaced(grid.start, grid.stop, grid.count);
    case GridSpec::Mode::log: return log_spaced(grid.start, grid.stop, grid.count);
    case GridSpec::Mode::list: return grid.values;
  }
  return {};
}

sim::SimConfig resolve_sim_config(const SimulationSpec& spec, const NetworkModel& net,
                                  const MobilityParams& mob) {
  sim::SimConfig cfg;
  cfg.seed = spec.seed;
  cfg.replications = spec.replications;
  cfg.horizon = spec.horizon ? *spec.horizon : sim::default_horizon(net, mob);
  cfg.guard_epsilon = spec.guard_epsilon;
  cfg.crossing_tol = spec.crossing_tol;
  cfg.validate();
  return cfg;
}

json scenario_to_json(const Scenario& s) {
  json tiers = json::array();
  for (const TierParams& t : s.network.tiers()) {
    tiers.push_back({{"intensity", t.intensity}, {"power", t.power}, {"bias", t.bias}});
  }
  json doc = {
      {"network", {{"alpha", s.network.alpha()}, {"tiers", tiers}}},
      {"mobility", {{"velocity", s.mobility.velocity}, {"ttt", s.mobility.ttt}, {"t_p", s.mobility.t_p}}},
      {"output", {{"dir", s.output_dir}}},
  };
  json grid;
  switch (s.grid.mode) {
    case GridSpec::Mode::automatic: grid = "auto"; break;
    case GridSpec::Mode::list: grid = s.grid.values; break;
    case GridSpec::Mode::linear:
    case GridSpec::Mode::log:
      grid = {{"start", s.grid.start}, {"stop", s.grid.stop}, {"count", s.grid.count},
              {"spacing", s.grid.mode == GridSpec::Mode::log ? "log" : "linear"}};
      break;
  }
  doc["analysis"] = {{"grid", grid}};
  if (s.simulation) {
    const SimulationSpec& sp = *s.simulation;
    doc["simulation"] = {{"seed", sp.seed},
                         {"replications", sp.replications},
                         {"guard_epsilon", sp.guard_epsilon},
                         {"crossing_tol", sp.crossing_tol}};
    if (sp.horizon) {
      doc["simulation"]["horizon"] = *sp.horizon;
    } else {
      doc["simulation"]["horizon"] = "auto";
    }
  }
  return doc;
}

}  // namespace sojourn
