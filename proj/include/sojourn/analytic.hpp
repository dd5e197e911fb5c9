#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sojourn/curve.hpp"
#include "sojourn/execution.hpp"
#include "sojourn/network.hpp"
#include "sojourn/numerics.hpp"
#include "sojourn/swept_geometry.hpp"

namespace sojourn::analytic {

// Controls the (r0, theta) double integrals behind the sojourn distributions.
// Both variables use fixed Gauss-Legendre panels: theta split at acos(beta_kj)
// and pi - acos(beta_kj), r0 split wherever a swept area changes branch and
// cut off where the serving-distance density falls below tail_epsilon.
struct AnalyticOptions {
  numerics::QuadratureSpec quadrature{};
  std::size_t theta_order = 32;
  std::size_t r0_order = 24;
  // Adaptive Simpson in theta instead of fixed panels; reference path for tests.
  bool adaptive_theta = false;
  geometry::DerivativeMode derivative_mode = geometry::DerivativeMode::validated;
};

// Probability that BS(0) belongs to tier k.
double tier_association_prob(const NetworkModel& net, TierIndex k);

// Density of the serving distance r0 given tier k.
double serving_distance_pdf(const NetworkModel& net, TierIndex k, double r0);

// P(S~ > T | tier = k): no handoff during [0, T] from the initial cell.
double ccdf_initial_sojourn(const NetworkModel& net, const MobilityParams& mob, TierIndex k,
                            double T, const AnalyticOptions& opts = {});

// Probability that a segment of length z from the origin meets a boundary of
// the tier-k cell it starts in. Purely geometric; the velocity cancels.
double linear_contact_cdf(const NetworkModel& net, const MobilityParams& mob, TierIndex k,
                          double z, const AnalyticOptions& opts = {});

struct ContactDensity {
  double value = 0.0;
  std::size_t evaluations = 0;           // swept-area derivative evaluations
  std::size_t fallback_evaluations = 0;  // of which used the numeric fallback
};

// d/dz of linear_contact_cdf, z > 0.
ContactDensity linear_contact_density(const NetworkModel& net, const MobilityParams& mob,
                                      TierIndex k, double z, const AnalyticOptions& opts = {});

// z -> 0 limit: sum_j lambda_j I(beta_kj) / (pi sqrt(sum_j lambda_j beta_jk^2)).
double linear_contact_density_at_zero(const NetworkModel& net, TierIndex k);

// Same limit computed by integrating the z = 0 swept-area derivative over
// (r0, theta); independent route to linear_contact_density_at_zero.
double linear_contact_density_at_zero_integral(const NetworkModel& net, TierIndex k,
                                               const AnalyticOptions& opts = {});

double mean_chord_length(const NetworkModel& net, TierIndex k);
double mean_sojourn_conditional(const NetworkModel& net, const MobilityParams& mob, TierIndex k);

// P(S > T | tier = k) = E[L | k] * d/dz H_l(z | k) at z = vT; equals 1 at T = 0.
double ccdf_sojourn_conditional(const NetworkModel& net, const MobilityParams& mob, TierIndex k,
                                double T, const AnalyticOptions& opts = {});

// Expected k -> j handoffs per unit time.
double handoff_rate_pair(const NetworkModel& net, const MobilityParams& mob, TierIndex k,
                         TierIndex j);
double handoff_rate_tier(const NetworkModel& net, const MobilityParams& mob, TierIndex k);
double total_handoff_rate(const NetworkModel& net, const MobilityParams& mob);

// Handoff rate once boundary crossings shorter than the TTT timer are dropped.
double effective_handoff_rate(const NetworkModel& net, const MobilityParams& mob, TierIndex k,
                              const AnalyticOptions& opts = {});
double ping_pong_rate(const NetworkModel& net, const MobilityParams& mob, TierIndex k,
                      const AnalyticOptions& opts = {});

// 60 log-spaced points over [0.01, 10] times the mean sojourn time.
std::vector<double> default_time_grid(const NetworkModel& net, const MobilityParams& mob);

struct TierMetrics {
  double association_prob = 0.0;
  double mean_sojourn = 0.0;
  double handoff_rate = 0.0;
  double effective_handoff_rate = 0.0;
  double ping_pong_rate = 0.0;
  double time_fraction = 0.0;
};

struct MobilityMetrics {
  std::vector<TierMetrics> tiers;
  std::vector<std::vector<double>> pair_rates;  // [k][j]
  double total_handoff_rate = 0.0;
  double mean_sojourn_unconditional = 0.0;
};

MobilityMetrics compute_metrics(const NetworkModel& net, const MobilityParams& mob,
                                const AnalyticOptions& opts = {});

struct AnalyticReport {
  MobilityMetrics metrics;
  std::vector<DistributionCurve> initial_ccdf;  // S~ per tier
  std::vector<DistributionCurve> sojourn_ccdf;  // S per tier
  DistributionCurve network_initial_ccdf;       // S~ mixed with weights P(tier = k)
  DistributionCurve network_ccdf;               // S mixed with weights H_k / H
  std::size_t fallback_evaluations = 0;
};

// Metrics plus every curve on `grid`. Grid points are independent tasks; the
// parallel path fills the same slots as the serial one.
AnalyticReport aggregate_metrics(const NetworkModel& net, const MobilityParams& mob,
                                 std::span<const double> grid, const AnalyticOptions& opts = {},
                                 Execution exec = Execution::parallel);

}  // namespace sojourn::analytic
