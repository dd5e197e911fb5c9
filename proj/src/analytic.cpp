#include "sojourn/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sojourn::analytic {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kExcursionLimit = 1e-4;

void check_tier(const NetworkModel& net, TierIndex k) {
  if (k >= net.tier_count()) throw std::out_of_range("tier index out of range");
}

// Breakpoints where the z -> 0 swept-area derivative changes branch.
std::vector<double> theta_breaks(const NetworkModel& net, TierIndex k) {
  std::vector<double> breaks{0.0, kPi};
  for (std::size_t j = 0; j < net.tier_count(); ++j) {
    const double b = net.beta(k, j);
    if (b < 1.0) {
      breaks.push_back(std::acos(b));
      breaks.push_back(kPi - std::acos(b));
    }
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  return breaks;
}

double r0_cutoff(const NetworkModel& net, TierIndex k, const AnalyticOptions& opts) {
  const double scale = 1.0 / std::sqrt(kPi * net.effective_density(k));
  return scale * std::sqrt(std::log(1.0 / opts.quadrature.tail_epsilon));
}

// Gauss-Legendre after the map x = mid - half cos(phi), which clusters nodes
// at both ends where the integrands have square-root behaviour.
template <class F>
double cos_mapped_rule(F&& f, double lo, double hi, std::size_t order) {
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const auto& rule = numerics::gauss_legendre(order);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double phi = 0.5 * kPi * (rule.nodes[i] + 1.0);
    sum += rule.weights[i] * f(mid - half * std::cos(phi)) * std::sin(phi);
  }
  return sum * half * 0.5 * kPi;
}

template <class F>
double integrate_panels(F&& f, std::vector<double>& breaks, std::size_t order) {
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    total += cos_mapped_rule(f, breaks[p], breaks[p + 1], order);
  }
  return total;
}

// r0 values at which some tier's swept area changes branch for this theta.
std::vector<double> r0_breaks(const NetworkModel& net, TierIndex k, double theta, double z,
                              double r_max) {
  std::vector<double> breaks;
  constexpr int kBasePanels = 4;
  for (int i = 0; i <= kBasePanels; ++i) breaks.push_back(r_max * i / kBasePanels);
  if (z == 0.0) return breaks;
  const double c = std::cos(theta);
  auto add = [&](double r) {
    if (r > 0.0 && r < r_max && std::isfinite(r)) breaks.push_back(r);
  };
  for (std::size_t j = 0; j < net.tier_count(); ++j) {
    const double b = net.beta(k, j);
    if (b < 1.0) {
      const double d = 1.0 - b * b;
      if (c > b) add(z * d / (2.0 * (c - b)));
      if (c > -b) add(z * d / (2.0 * (c + b)));
    } else if (b > 1.0 && c > 0.0) {
      add(z / c);  // closest approach reaches the end of the sweep
    }
  }
  return breaks;
}

// int_0^pi int_0^inf radial(r0, theta) dr0 dtheta
template <class Radial>
double double_integral(const NetworkModel& net, TierIndex k, double z,
                       const AnalyticOptions& opts, Radial&& radial) {
  const double r_max = r0_cutoff(net, k, opts);
  auto inner = [&](double theta) {
    auto breaks = r0_breaks(net, k, theta, z, r_max);
    return integrate_panels([&](double r0) { return r0 > 0.0 ? radial(r0, theta) : 0.0; },
                            breaks, opts.r0_order);
  };
  auto breaks = theta_breaks(net, k);
  if (!opts.adaptive_theta) return integrate_panels(inner, breaks, opts.theta_order);
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const auto res = numerics::integrate(inner, breaks[p], breaks[p + 1], opts.quadrature);
    if (!res.converged) {
      throw numerics::QuadratureError("theta integral did not converge (tier " +
                                      std::to_string(k + 1) + ", z = " + std::to_string(z) + ")");
    }
    total += res.value;
  }
  return total;
}

// P(no boundary crossing within distance z | tier k); z >= 0.
double contact_ccdf(const NetworkModel& net, TierIndex k, double z, const AnalyticOptions& opts) {
  if (z == 0.0) return 1.0;
  const double lambda_k = net.tier(k).intensity;
  auto radial = [&](double r0, double theta) {
    double sum = 0.0;
    for (std::size_t j = 0; j < net.tier_count(); ++j) {
      const geometry::SweptDiscQuery q{r0, theta, z, net.beta(k, j)};
      sum += net.tier(j).intensity * geometry::evaluate_swept(q, false).area;
    }
    return 2.0 * lambda_k * r0 * std::exp(-sum);
  };
  return double_integral(net, k, z, opts, radial) / tier_association_prob(net, k);
}

double clamp_probability(double raw, const char* what) {
  if (!(raw > -kExcursionLimit && raw < 1.0 + kExcursionLimit)) {
    throw numerics::QuadratureError(std::string(what) + ": value " + std::to_string(raw) +
                                    " outside [0, 1] beyond quadrature noise");
  }
  return std::clamp(raw, 0.0, 1.0);
}

template <class F>
void run_tasks(std::size_t count, Execution exec, F&& task) {
  if (exec == Execution::serial) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::exception_ptr failure;
  const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      task(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(sojourn_analytic_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

double tier_association_prob(const NetworkModel& net, TierIndex k) {
  check_tier(net, k);
  return net.tier(k).intensity / net.effective_density(k);
}

double serving_distance_pdf(const NetworkModel& net, TierIndex k, double r0) {
  check_tier(net, k);
  if (!(r0 >= 0.0)) throw std::invalid_argument("serving_distance_pdf: r0 must be >= 0");
  const double lambda_k = net.tier(k).intensity;
  return 2.0 * lambda_k * kPi * r0 * std::exp(-net.effective_density(k) * kPi * r0 * r0) /
         tier_association_prob(net, k);
}

double ccdf_initial_sojourn(const NetworkModel& net, const MobilityParams& mob, TierIndex k,
                            double T, const AnalyticOptions& opts) {
  check_tier(net, k);
  mob.validate();
  if (!(T >= 0.0)) throw std::invalid_argument("ccdf_initial_sojourn: T must be >= 0");
  return clamp_probability(contact_ccdf(net, k, mob.velocity * T, opts), "ccdf_initial_sojourn");
}

double linear_contact_cdf(const NetworkModel& net, const MobilityParams& mob, TierIndex k,
                          double z, const AnalyticOptions& opts) {
  check_tier(net, k);
  mob.validate();
  if (!(z >= 0.0)) throw std::invalid_argument("linear_contact_cdf: z must be >= 0");
  return 1.0 - contact_ccdf(net, k, z, opts);
}

ContactDensity linear_contact_density(const NetworkModel& net, const MobilityParams& mob,
                                      TierIndex k, double z, const AnalyticOptions& opts) {
  check_tier(net, k);
  mob.validate();
  if (!(z > 0.0)) throw std::invalid_argument("linear_contact_density: z must be > 0");

  ContactDensity out;
  const double lambda_k = net.tier(k).intensity;
  auto radial = [&](double r0, double theta) {
    double area = 0.0;
    double rate = 0.0;
    for (std::size_t j = 0; j < net.tier_count(); ++j) {
      const geometry::SweptDiscQuery q{r0, theta, z, net.beta(k, j)};
      const auto e = geometry::evaluate_swept(q, true, opts.derivative_mode);
      const double lambda_j = net.tier(j).intensity;
      area += lambda_j * e.area;
      rate += lambda_j * e.derivative;
      ++out.evaluations;
      if (e.fallback && opts.derivative_mode == geometry::DerivativeMode::validated) {
        ++out.fallback_evaluations;
      }
    }
    return 2.0 * lambda_k * r0 * rate * std::exp(-area);
  };
  out.value = double_integral(net, k, z, opts, radial) / tier_association_prob(net, k);
  return out;
}

double linear_contact_density_at_zero(const NetworkModel& net, TierIndex k) {
  check_tier(net, k);
  double num = 0.0;
  for (std::size_t j = 0; j < net.tier_count(); ++j) {
    num += net.tier(j).intensity * geometry::shape_integral_I(net.beta(k, j));
  }
  return num / (kPi * std::sqrt(net.effective_density(k)));
}

double linear_contact_density_at_zero_integral(const NetworkModel& net, TierIndex k,
                                               const AnalyticOptions& opts) {
  check_tier(net, k);
  const double lambda_k = net.tier(k).intensity;
  const double density = net.effective_density(k);
  auto radial = [&](double r0, double theta) {
    double rate = 0.0;
    for (std::size_t j = 0; j < net.tier_count(); ++j) {
      rate += net.tier(j).intensity * geometry::swept_area_derivative_at_zero(r0, theta, net.beta(k, j));
    }
    return 2.0 * lambda_k * r0 * rate * std::exp(-density * kPi * r0 * r0);
  };
  return double_integral(net, k, 0.0, opts, radial) / tier_association_prob(net, k);
}

double mean_chord_length(const NetworkModel& net, TierIndex k) {
  return 1.0 / linear_contact_density_at_zero(net, k);
}

double mean_sojourn_conditional(const NetworkModel& net, const MobilityParams& mob, TierIndex k) {
  mob.validate();
  return mean_chord_length(net, k) / mob.velocity;
}

double ccdf_sojourn_conditional(const NetworkModel& net, const MobilityParams& mob, TierIndex k,
                                double T, const AnalyticOptions& opts) {
  check_tier(net, k);
  mob.validate();
  if (!(T >= 0.0)) throw std::invalid_argument("ccdf_sojourn_conditional: T must be >= 0");
  if (T == 0.0) return 1.0;
  const double density = linear_contact_density(net, mob, k, mob.velocity * T, opts).value;
  return clamp_probability(mean_chord_length(net, k) * density, "ccdf_sojourn_conditional");
}

double handoff_rate_pair(const NetworkModel& net, const MobilityParams& mob, TierIndex k,
                         TierIndex j) {
  check_tier(net, k);
  check_tier(net, j);
  mob.validate();
  const double lk = net.tier(k).intensity;
  const double lj = net.tier(j).intensity;
  return mob.velocity / kPi * lk * lj * geometry::shape_integral_F(net.beta(k, j)) /
         std::pow(net.effective_density(k), 1.5);
}

double handoff_rate_tier(const NetworkModel& net, const MobilityParams& mob, TierIndex k) {
  check_tier(net, k);
  mob.validate();
  double sum = 0.0;
  for (std::size_t j = 0; j < net.tier_count(); ++j) {
    sum += net.tier(j).intensity * geometry::shape_integral_F(net.beta(k, j));
  }
  return mob.velocity / kPi * net.tier(k).intensity * sum / std::pow(net.effective_density(k), 1.5);
}

double total_handoff_rate(const NetworkModel& net, const MobilityParams& mob) {
  double sum = 0.0;
  for (std::size_t k = 0; k < net.tier_count(); ++k) sum += handoff_rate_tier(net, mob, k);
  return sum;
}

double effective_handoff_rate(const NetworkModel& net, const MobilityParams& mob, TierIndex k,
                              const AnalyticOptions& opts) {
  return handoff_rate_tier(net, mob, k) * ccdf_sojourn_conditional(net, mob, k, mob.ttt, opts);
}

double ping_pong_rate(const NetworkModel& net, const MobilityParams& mob, TierIndex k,
                      const AnalyticOptions& opts) {
  mob.validate();
  if (mob.t_p == mob.ttt) return 0.0;
  const double upper = ccdf_sojourn_conditional(net, mob, k, mob.ttt, opts);
  const double lower = ccdf_sojourn_conditional(net, mob, k, mob.t_p, opts);
  return handoff_rate_tier(net, mob, k) * (upper - lower);
}

std::vector<double> default_time_grid(const NetworkModel& net, const MobilityParams& mob) {
  const double mean = 1.0 / total_handoff_rate(net, mob);
  return log_spaced(0.01 * mean, 10.0 * mean, 60);
}

MobilityMetrics compute_metrics(const NetworkModel& net, const MobilityParams& mob,
                                const AnalyticOptions& opts) {
  mob.validate();
  MobilityMetrics m;
  const std::size_t K = net.tier_count();
  m.tiers.resize(K);
  m.pair_rates.assign(K, std::vector<double>(K, 0.0));
  for (std::size_t k = 0; k < K; ++k) {
    auto& t = m.tiers[k];
    t.association_prob = tier_association_prob(net, k);
    t.time_fraction = t.association_prob;
    t.mean_sojourn = mean_sojourn_conditional(net, mob, k);
    t.handoff_rate = handoff_rate_tier(net, mob, k);
    t.effective_handoff_rate = effective_handoff_rate(net, mob, k, opts);
    t.ping_pong_rate = ping_pong_rate(net, mob, k, opts);
    for (std::size_t j = 0; j < K; ++j) m.pair_rates[k][j] = handoff_rate_pair(net, mob, k, j);
    m.total_handoff_rate += t.handoff_rate;
  }
  m.mean_sojourn_unconditional = 1.0 / m.total_handoff_rate;
  return m;
}

AnalyticReport aggregate_metrics(const NetworkModel& net, const MobilityParams& mob,
                                 std::span<const double> grid, const AnalyticOptions& opts,
                                 Execution exec) {
  mob.validate();
  if (grid.empty()) throw std::invalid_argument("aggregate_metrics: empty time grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0) || (i > 0 && !(grid[i] > grid[i - 1]))) {
      throw std::invalid_argument("aggregate_metrics: time grid must be increasing and >= 0");
    }
  }

  AnalyticReport report;
  report.metrics = compute_metrics(net, mob, opts);
  const std::size_t K = net.tier_count();
  const std::size_t n = grid.size();

  std::vector<double> initial(K * n), sojourn(K * n);
  std::vector<std::size_t> fallbacks(K * n, 0);
  const std::vector<double> mean_chord = [&] {
    std::vector<double> out(K);
    for (std::size_t k = 0; k < K; ++k) out[k] = mean_chord_length(net, k);
    return out;
  }();

  // Task t < K n fills S~, the rest fill S.
  run_tasks(2 * K * n, exec, [&](std::size_t t) {
    const bool is_sojourn = t >= K * n;
    const std::size_t slot = is_sojourn ? t - K * n : t;
    const std::size_t k = slot / n;
    const double T = grid[slot % n];
    if (!is_sojourn) {
      initial[slot] = ccdf_initial_sojourn(net, mob, k, T, opts);
      return;
    }
    if (T == 0.0) {
      sojourn[slot] = 1.0;
      return;
    }
    const auto d = linear_contact_density(net, mob, k, mob.velocity * T, opts);
    fallbacks[slot] = d.fallback_evaluations;
    sojourn[slot] = clamp_probability(mean_chord[k] * d.value, "ccdf_sojourn_conditional");
  });

  const std::vector<double> abscissae(grid.begin(), grid.end());
  auto make_curve = [&](const std::vector<double>& values, std::size_t k) {
    DistributionCurve c;
    c.abscissae = abscissae;
    c.values.assign(values.begin() + static_cast<std::ptrdiff_t>(k * n),
                    values.begin() + static_cast<std::ptrdiff_t>((k + 1) * n));
    c.kind = CurveKind::ccdf;
    c.provenance = Provenance::analytic;
    return c;
  };
  for (std::size_t k = 0; k < K; ++k) {
    report.initial_ccdf.push_back(make_curve(initial, k));
    report.sojourn_ccdf.push_back(make_curve(sojourn, k));
  }

  auto mixture = [&](const std::vector<double>& values, auto weight) {
    DistributionCurve c;
    c.abscissae = abscissae;
    c.values.assign(n, 0.0);
    c.kind = CurveKind::ccdf;
    c.provenance = Provenance::analytic;
    for (std::size_t k = 0; k < K; ++k) {
      const double w = weight(k);
      for (std::size_t i = 0; i < n; ++i) c.values[i] += w * values[k * n + i];
    }
    for (auto& v : c.values) v = std::clamp(v, 0.0, 1.0);
    return c;
  };
  const double H = report.metrics.total_handoff_rate;
  report.network_initial_ccdf =
      mixture(initial, [&](std::size_t k) { return report.metrics.tiers[k].association_prob; });
  report.network_ccdf =
      mixture(sojourn, [&](std::size_t k) { return report.metrics.tiers[k].handoff_rate / H; });
  for (auto f : fallbacks) report.fallback_evaluations += f;
  return report;
}

}  // namespace sojourn::analytic
