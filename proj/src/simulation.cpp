#include "sojourn/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "sojourn/analytic.hpp"
#include "sojourn/philox.hpp"

namespace sojourn::sim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxBisectionDepth = 64;
constexpr int kMaxWindowExtensions = 12;
constexpr double kPointsPerTile = 32.0;

// A BS outside the window could be serving; the window is grown and the
// replication redone.
struct GuardViolation {};

std::string tier_name(TierIndex k) { return "tier " + std::to_string(k + 1); }

struct Stats {
  double mean = 0.0;
  double se = 0.0;
};

Stats replication_stats(const std::vector<double>& xs) {
  Stats s;
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) return s;
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.se = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  return s;
}

class Sweeper {
 public:
  Sweeper(const NetworkModel& net, const MobilityParams& mob, const SimConfig& cfg,
          const Window& window, std::span<const BaseStation> bss)
      : net_(net), mob_(mob), cfg_(cfg), window_(window), bss_(bss), index_(bss, net) {
    w_min_ = kInf;
    w_max_ = 0.0;
    for (std::size_t k = 0; k < net.tier_count(); ++k) {
      w_min_ = std::min(w_min_, net.association_weight(k));
      w_max_ = std::max(w_max_, net.association_weight(k));
    }
  }

  Replication run() {
    Replication rep;
    const double horizon = cfg_.horizon;
    const auto steps = static_cast<std::size_t>(std::ceil(horizon / coarse_step(net_, mob_)));
    Sample prev = sample(0.0);
    const std::size_t initial_bs = prev.bs;
    for (std::size_t i = 1; i <= steps; ++i) {
      const double t = i == steps ? horizon : horizon * static_cast<double>(i) / static_cast<double>(steps);
      Sample next = sample(t);
      const std::size_t before = rep.events.size();
      refine(prev, next, 0, rep.events);
      const std::size_t found = rep.events.size() - before;
      if (found != (prev.bs != next.bs ? 1u : 0u)) ++rep.skip_repairs;
      prev = next;
    }

    double start = 0.0;
    std::size_t bs = initial_bs;
    for (const HandoffEvent& e : rep.events) {
      rep.dwells.push_back({start, e.time, bss_[bs].tier, bss_[bs].id, start == 0.0, false});
      start = e.time;
      bs = e.to_bs;
    }
    rep.dwells.push_back({start, horizon, bss_[bs].tier, bss_[bs].id, rep.events.empty(), true});
    return rep;
  }

 private:
  struct Sample {
    double t = 0.0;
    std::size_t bs = 0;
    double margin = 0.0;  // time for which the serving BS is certified unchanged
  };

  Sample sample(double t) const {
    const double x = cfg_.start_x + mob_.velocity * t;
    const double y = cfg_.start_y;
    const ServingResult r = index_.query(x, y);
    const double edge = std::min({x - window_.x_min, window_.x_max - x, y - window_.y_min,
                                  window_.y_max - y});
    // Nothing outside the window is closer than w_min * edge.
    const double wall = w_min_ * edge;
    if (!(r.best <= wall)) throw GuardViolation{};
    const double rival = std::min(r.runner_up, wall);
    const double closing = (net_.association_weight(bss_[r.index].tier) + w_max_) * mob_.velocity;
    return {t, r.index, (rival - r.best) / closing};
  }

  // Weighted distances are Lipschitz in t, so the serving BS cannot change
  // within `margin` of a sample; bisect until the margins cover the interval.
  void refine(const Sample& a, const Sample& b, int depth, std::vector<HandoffEvent>& out) const {
    const double width = b.t - a.t;
    if (a.bs == b.bs && a.margin + b.margin >= width) return;
    if (width <= cfg_.crossing_tol) {
      if (a.bs != b.bs) {
        const BaseStation& from = bss_[a.bs];
        const BaseStation& to = bss_[b.bs];
        out.push_back({0.5 * (a.t + b.t), from.tier, to.tier, from.id, to.id});
      }
      return;
    }
    if (depth >= kMaxBisectionDepth) {
      throw SimulatorError("sweep_trajectory: bisection depth limit reached near t = " +
                           std::to_string(a.t) + "; crossing_tol too small for the coarse step");
    }
    const Sample m = sample(0.5 * (a.t + b.t));
    refine(a, m, depth + 1, out);
    refine(m, b, depth + 1, out);
  }

  const NetworkModel& net_;
  const MobilityParams& mob_;
  const SimConfig& cfg_;
  Window window_;
  std::span<const BaseStation> bss_;
  ServingIndex index_;
  double w_min_;
  double w_max_;
};

}  // namespace

void SimConfig::validate() const {
  if (replications < 1) throw ValidationError("simulation: replications must be >= 1");
  if (replications > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError("simulation: replications must fit in 32 bits");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ValidationError("simulation: horizon must be > 0");
  }
  if (!(guard_epsilon > 0.0 && guard_epsilon < 1.0)) {
    throw ValidationError("simulation: guard_epsilon must lie in (0, 1)");
  }
  if (!(crossing_tol > 0.0) || !std::isfinite(crossing_tol)) {
    throw ValidationError("simulation: crossing_tol must be > 0");
  }
  if (!(guard_scale > 0.0) || !std::isfinite(guard_scale)) {
    throw ValidationError("simulation: guard_scale must be > 0");
  }
  if (!std::isfinite(start_x) || !std::isfinite(start_y)) {
    throw ValidationError("simulation: start position must be finite");
  }
}

double default_horizon(const NetworkModel& net, const MobilityParams& mob) {
  return 50.0 / analytic::total_handoff_rate(net, mob);
}

double guard_distance(const NetworkModel& net, double guard_epsilon) {
  double beta_max = 0.0;
  double lambda_min = kInf;
  for (std::size_t k = 0; k < net.tier_count(); ++k) {
    lambda_min = std::min(lambda_min, net.tier(k).intensity);
    for (std::size_t j = 0; j < net.tier_count(); ++j) beta_max = std::max(beta_max, net.beta(k, j));
  }
  return beta_max * std::sqrt(std::log(1.0 / guard_epsilon) / (std::numbers::pi * lambda_min));
}

Window simulation_window(const NetworkModel& net, const MobilityParams& mob, const SimConfig& cfg) {
  const double pad = cfg.guard_scale * guard_distance(net, cfg.guard_epsilon);
  const double length = mob.velocity * cfg.horizon;
  return {cfg.start_x - pad, cfg.start_x + length + pad, cfg.start_y - pad, cfg.start_y + pad};
}

double coarse_step(const NetworkModel& net, const MobilityParams& mob) {
  double sum = 0.0;
  for (std::size_t k = 0; k < net.tier_count(); ++k) {
    double b2 = 0.0;
    for (std::size_t j = 0; j < net.tier_count(); ++j) b2 = std::max(b2, net.beta(j, k) * net.beta(j, k));
    sum += net.tier(k).intensity * b2;
  }
  return 0.05 / (mob.velocity * std::sqrt(sum));
}

std::vector<BaseStation> sample_network(const NetworkModel& net, const Window& window,
                                        std::uint64_t seed, std::size_t replication) {
  if (!(window.area() > 0.0)) throw std::invalid_argument("sample_network: window area must be > 0");
  if (net.tier_count() > 0xFFFF) throw std::invalid_argument("sample_network: too many tiers");
  std::vector<BaseStation> out;
  for (std::size_t k = 0; k < net.tier_count(); ++k) {
    const double lambda = net.tier(k).intensity;
    const double side = std::sqrt(kPointsPerTile / lambda);
    const double ix0 = std::floor(window.x_min / side), ix1 = std::floor(window.x_max / side);
    const double iy0 = std::floor(window.y_min / side), iy1 = std::floor(window.y_max / side);
    if (ix0 < -2147483648.0 || ix1 > 2147483647.0 || iy0 < -32768.0 || iy1 > 32767.0) {
      throw SimulatorError("sample_network: window exceeds the tile index range");
    }
    std::poisson_distribution<long> count(lambda * side * side);
    for (auto ix = static_cast<std::int64_t>(ix0); ix <= static_cast<std::int64_t>(ix1); ++ix) {
      for (auto iy = static_cast<std::int64_t>(iy0); iy <= static_cast<std::int64_t>(iy1); ++iy) {
        const auto s1 = static_cast<std::uint32_t>(static_cast<std::int32_t>(ix));
        const auto s2 = static_cast<std::uint32_t>(static_cast<std::uint16_t>(static_cast<std::int16_t>(iy))) |
                        (static_cast<std::uint32_t>(k) << 16);
        rng::PhiloxEngine eng(seed, s1, s2, static_cast<std::uint32_t>(replication));
        count.reset();
        const long n = count(eng);
        const double x0 = static_cast<double>(ix) * side;
        const double y0 = static_cast<double>(iy) * side;
        for (long i = 0; i < n; ++i) {
          const double x = x0 + side * eng.uniform();
          const double y = y0 + side * eng.uniform();
          if (x >= window.x_min && x < window.x_max && y >= window.y_min && y < window.y_max) {
            out.push_back({x, y, k, 0});
          }
        }
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const BaseStation& a, const BaseStation& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.y != b.y) return a.y < b.y;
    return a.tier < b.tier;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].id = i;
  return out;
}

ServingResult serving_bs_bruteforce(std::span<const BaseStation> bss, const NetworkModel& net,
                                    double x, double y) {
  if (bss.empty()) throw std::invalid_argument("serving_bs: empty BS list");
  ServingResult r{0, kInf, kInf};
  for (std::size_t i = 0; i < bss.size(); ++i) {
    const double d = net.association_weight(bss[i].tier) * std::hypot(bss[i].x - x, bss[i].y - y);
    if (d < r.best || (d == r.best && bss[i].id < bss[r.index].id)) {
      r.runner_up = r.best;
      r.best = d;
      r.index = i;
    } else if (d < r.runner_up) {
      r.runner_up = d;
    }
  }
  return r;
}

ServingIndex::ServingIndex(std::span<const BaseStation> bss, const NetworkModel& net)
    : bss_(bss), w_min_(kInf) {
  xs_.reserve(bss.size());
  for (std::size_t i = 0; i < bss.size(); ++i) {
    if (i > 0 && bss[i].x < bss[i - 1].x) throw std::invalid_argument("ServingIndex: BSs not sorted by x");
    xs_.push_back(bss[i].x);
  }
  for (std::size_t k = 0; k < net.tier_count(); ++k) {
    weight_.push_back(net.association_weight(k));
    w_min_ = std::min(w_min_, weight_.back());
  }
}

ServingResult ServingIndex::query(double x, double y) const {
  if (bss_.empty()) throw std::invalid_argument("serving_bs: empty BS list");
  ServingResult r{0, kInf, kInf};
  auto consider = [&](std::size_t i) {
    const BaseStation& b = bss_[i];
    const double d = weight_[b.tier] * std::hypot(b.x - x, b.y - y);
    if (d < r.best || (d == r.best && b.id < bss_[r.index].id)) {
      r.runner_up = r.best;
      r.best = d;
      r.index = i;
    } else if (d < r.runner_up) {
      r.runner_up = d;
    }
  };
  const auto pos = static_cast<std::size_t>(std::lower_bound(xs_.begin(), xs_.end(), x) - xs_.begin());
  for (std::size_t i = pos; i < xs_.size(); ++i) {
    if ((xs_[i] - x) * w_min_ > r.runner_up) break;
    consider(i);
  }
  for (std::size_t i = pos; i-- > 0;) {
    if ((x - xs_[i]) * w_min_ > r.runner_up) break;
    consider(i);
  }
  return r;
}

Replication sweep_trajectory(const NetworkModel& net, const MobilityParams& mob,
                             const SimConfig& cfg, std::size_t replication) {
  SimConfig grown = cfg;
  for (int ext = 0; ext <= kMaxWindowExtensions; ++ext) {
    const Window window = simulation_window(net, mob, grown);
    const auto bss = sample_network(net, window, cfg.seed, replication);
    if (!bss.empty()) {
      try {
        Replication rep = Sweeper(net, mob, grown, window, bss).run();
        rep.window_extensions = static_cast<std::size_t>(ext);
        return rep;
      } catch (const GuardViolation&) {
      }
    }
    grown.guard_scale *= 2.0;
  }
  throw SimulatorError("sweep_trajectory: replication " + std::to_string(replication) +
                       " still sees the window edge after " + std::to_string(kMaxWindowExtensions) +
                       " guard doublings");
}

TimeFractions empirical_time_fractions(std::size_t tier_count, std::span<const Replication> reps) {
  TimeFractions out;
  if (reps.empty()) throw std::invalid_argument("empirical_time_fractions: no replications");
  std::vector<std::vector<double>> per_rep(tier_count);
  for (const Replication& rep : reps) {
    std::vector<double> t(tier_count, 0.0);
    double total = 0.0;
    for (const Dwell& d : rep.dwells) {
      t.at(d.tier) += d.duration();
      total += d.duration();
    }
    if (!(total > 0.0)) throw std::invalid_argument("empirical_time_fractions: zero total dwell time");
    for (std::size_t k = 0; k < tier_count; ++k) per_rep[k].push_back(t[k] / total);
  }
  for (std::size_t k = 0; k < tier_count; ++k) {
    const Stats s = replication_stats(per_rep[k]);
    out.fraction.push_back(s.mean);
    out.stderr_.push_back(s.se);
  }
  return out;
}

SimSummary estimate_curves(std::size_t tier_count, std::span<const Replication> reps,
                           std::span<const double> grid, double horizon) {
  if (reps.empty()) throw std::invalid_argument("estimate_curves: no replications");
  if (!(horizon > 0.0)) throw std::invalid_argument("estimate_curves: horizon must be > 0");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0) || (i > 0 && !(grid[i] > grid[i - 1]))) {
      throw ValidationError("time grid must be increasing and >= 0");
    }
  }
  if (!grid.empty() && grid.back() > horizon) {
    throw ValidationError("time grid extends past the simulation horizon (" + std::to_string(grid.back()) +
                          " > " + std::to_string(horizon) + ")");
  }
  const std::size_t K = tier_count;
  const std::size_t n = grid.size();
  const std::vector<double> abscissae(grid.begin(), grid.end());

  SimSummary s;
  s.replications = reps.size();
  s.horizon = horizon;

  // S~ and the stay probability, binomial per initial tier.
  std::vector<std::vector<double>> exceed(K + 1, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> stay(K, std::vector<double>(n, 0.0));
  s.initial_count.assign(K, 0);
  // S, weighted.
  struct Weighted {
    double w = 0.0, w2 = 0.0, ws = 0.0, ws2 = 0.0;
    std::vector<double> exceed;
  };
  std::vector<Weighted> dw(K + 1);
  for (auto& d : dw) d.exceed.assign(n, 0.0);
  s.dwell_count.assign(K, 0);

  std::vector<std::vector<double>> rate(K), pair(K * K);
  std::vector<double> total_rate;

  for (const Replication& rep : reps) {
    if (rep.dwells.empty()) throw std::invalid_argument("estimate_curves: replication without dwells");
    const Dwell& first = rep.dwells.front();
    const TierIndex k0 = first.tier;
    ++s.initial_count.at(k0);
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (first.duration() > grid[i]) {
        exceed[k0][i] += 1.0;
        exceed[K][i] += 1.0;
      }
      while (cursor + 1 < rep.dwells.size() && rep.dwells[cursor].end <= grid[i]) ++cursor;
      if (rep.dwells[cursor].bs == first.bs) stay[k0][i] += 1.0;
    }

    for (const Dwell& d : rep.dwells) {
      if (d.initial || d.censored) continue;
      const double len = d.duration();
      const double w = horizon / (horizon - len);
      ++s.dwell_count.at(d.tier);
      for (Weighted* acc : {&dw[d.tier], &dw[K]}) {
        acc->w += w;
        acc->w2 += w * w;
        acc->ws += w * len;
        acc->ws2 += w * len * len;
        for (std::size_t i = 0; i < n; ++i) {
          if (len > grid[i]) acc->exceed[i] += w;
        }
      }
    }

    std::vector<double> counts(K * K, 0.0);
    for (const HandoffEvent& e : rep.events) counts.at(e.from_tier * K + e.to_tier) += 1.0;
    double all = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      double out = 0.0;
      for (std::size_t j = 0; j < K; ++j) {
        pair[k * K + j].push_back(counts[k * K + j] / horizon);
        out += counts[k * K + j];
      }
      rate[k].push_back(out / horizon);
      all += out;
    }
    total_rate.push_back(all / horizon);
    s.skip_repairs += rep.skip_repairs;
    s.window_extensions += rep.window_extensions;
  }

  auto binomial_curve = [&](const std::vector<double>& hits, std::size_t count) {
    DistributionCurve c;
    c.kind = CurveKind::ccdf;
    c.provenance = Provenance::empirical;
    if (count == 0) return c;
    c.abscissae = abscissae;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = hits[i] / static_cast<double>(count);
      c.values.push_back(p);
      c.stderrs.push_back(std::sqrt(p * (1.0 - p) / static_cast<double>(count)));
    }
    return c;
  };
  auto weighted_curve = [&](const Weighted& acc) {
    DistributionCurve c;
    c.kind = CurveKind::ccdf;
    c.provenance = Provenance::empirical;
    if (acc.w == 0.0) return c;
    c.abscissae = abscissae;
    const double n_eff = acc.w * acc.w / acc.w2;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = std::clamp(acc.exceed[i] / acc.w, 0.0, 1.0);
      c.values.push_back(p);
      c.stderrs.push_back(std::sqrt(p * (1.0 - p) / n_eff));
    }
    return c;
  };
  auto weighted_mean = [](const Weighted& acc) {
    Stats st;
    if (acc.w == 0.0) return st;
    st.mean = acc.ws / acc.w;
    const double var = std::max(0.0, acc.ws2 / acc.w - st.mean * st.mean);
    st.se = std::sqrt(var / (acc.w * acc.w / acc.w2));
    return st;
  };

  for (std::size_t k = 0; k < K; ++k) {
    s.initial_ccdf.push_back(binomial_curve(exceed[k], s.initial_count[k]));
    s.stay_probability.push_back(binomial_curve(stay[k], s.initial_count[k]));
    s.sojourn_ccdf.push_back(weighted_curve(dw[k]));
    const Stats m = weighted_mean(dw[k]);
    s.mean_sojourn.push_back(m.mean);
    s.mean_sojourn_se.push_back(m.se);
    const Stats r = replication_stats(rate[k]);
    s.handoff_rate.push_back(r.mean);
    s.handoff_rate_se.push_back(r.se);
    s.pair_rate.emplace_back();
    s.pair_rate_se.emplace_back();
    for (std::size_t j = 0; j < K; ++j) {
      const Stats p = replication_stats(pair[k * K + j]);
      s.pair_rate.back().push_back(p.mean);
      s.pair_rate_se.back().push_back(p.se);
    }
  }
  s.network_initial_ccdf = binomial_curve(exceed[K], reps.size());
  s.network_ccdf = weighted_curve(dw[K]);
  const Stats pooled = weighted_mean(dw[K]);
  s.mean_sojourn_unconditional = pooled.mean;
  s.mean_sojourn_unconditional_se = pooled.se;
  const Stats tot = replication_stats(total_rate);
  s.total_handoff_rate = tot.mean;
  s.total_handoff_rate_se = tot.se;

  const TimeFractions tf = empirical_time_fractions(K, reps);
  s.time_fraction = tf.fraction;
  s.time_fraction_se = tf.stderr_;

  for (std::size_t k = 0; k < K; ++k) {
    if (s.initial_count[k] < 100) {
      s.warnings.push_back(tier_name(k) + ": only " + std::to_string(s.initial_count[k]) +
                           " replications start in this tier");
    }
    if (s.dwell_count[k] < 100) {
      s.warnings.push_back(tier_name(k) + ": only " + std::to_string(s.dwell_count[k]) +
                           " complete dwells");
    }
  }
  if (reps.size() < 2) s.warnings.push_back("single replication: rate standard errors are zero");
  return s;
}

SimSummary simulate(const NetworkModel& net, const MobilityParams& mob, const SimConfig& cfg,
                    std::span<const double> grid, Execution exec) {
  cfg.validate();
  mob.validate();
  std::vector<Replication> reps(cfg.replications);
  const auto count = static_cast<std::int64_t>(cfg.replications);
  if (exec == Execution::serial) {
    for (std::int64_t r = 0; r < count; ++r) {
      reps[static_cast<std::size_t>(r)] = sweep_trajectory(net, mob, cfg, static_cast<std::size_t>(r));
    }
  } else {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t r = 0; r < count; ++r) {
      try {
        reps[static_cast<std::size_t>(r)] = sweep_trajectory(net, mob, cfg, static_cast<std::size_t>(r));
      } catch (...) {
#pragma omp critical(sojourn_sim_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  SimSummary s = estimate_curves(net.tier_count(), reps, grid, cfg.horizon);
  s.seed = cfg.seed;
  return s;
}

}  // namespace sojourn::sim
