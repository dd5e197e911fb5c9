#include "sojourn/identities.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sojourn/analytic.hpp"
#include "sojourn/philox.hpp"
#include "sojourn/swept_geometry.hpp"

namespace sojourn {

namespace {

std::string fmt_beta(double b) {
  std::ostringstream os;
  os << b;
  return os.str();
}

double relative(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

std::vector<NetworkModel> random_networks(std::size_t count, std::uint64_t seed) {
  rng::PhiloxEngine eng(seed, 0x6e657477u, 0, 0);
  auto log_uniform = [&](double lo, double hi) {
    return lo * std::pow(hi / lo, eng.uniform());
  };
  std::vector<NetworkModel> out;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t K = 1 + i % 3;
    std::vector<TierParams> tiers;
    for (std::size_t k = 0; k < K; ++k) {
      const double lambda = log_uniform(1e-4, 1e-2);
      const double power = log_uniform(1.0, 100.0);
      const double bias = log_uniform(1.0, 10.0);
      tiers.push_back({lambda, power, bias});
    }
    out.emplace_back(std::move(tiers), 2.5 + 2.5 * eng.uniform());
  }
  return out;
}

std::vector<IdentityCheck> run_identity_suite(std::uint64_t seed) {
  using geometry::shape_integral_F;
  using geometry::shape_integral_I;
  std::vector<IdentityCheck> out;

  out.push_back({"F(1) = 4", std::abs(shape_integral_F(1.0) - 4.0), 1e-9});
  out.push_back({"I(1) = 4", std::abs(shape_integral_I(1.0) - 4.0), 1e-9});
  for (double b : {0.5, 0.8409, 1.0, 1.1892, 2.0, 4.0}) {
    out.push_back({"I = F at beta " + fmt_beta(b), std::abs(shape_integral_I(b) - shape_integral_F(b)), 1e-6});
  }
  for (double b : {1.1, 1.5, 2.0, 4.0}) {
    const double b3 = b * b * b;
    out.push_back({"F(1/b) = b^3 F(b) at b " + fmt_beta(b),
                   std::abs(shape_integral_F(1.0 / b) - b3 * shape_integral_F(b)), 1e-6});
    out.push_back({"I(1/b) = b^3 I(b) at b " + fmt_beta(b),
                   std::abs(shape_integral_I(1.0 / b) - b3 * shape_integral_I(b)), 1e-6});
  }

  const MobilityParams mob{5.0, 0.0, 0.0};
  const auto nets = random_networks(20, seed);
  double worst = 0.0;
  for (const NetworkModel& net : nets) {
    for (std::size_t k = 0; k < net.tier_count(); ++k) {
      const double lhs = analytic::mean_sojourn_conditional(net, mob, k) * analytic::handoff_rate_tier(net, mob, k);
      worst = std::max(worst, std::abs(lhs - analytic::tier_association_prob(net, k)));
    }
  }
  out.push_back({"E[S|k] H_k = P(tier = k) on 20 random networks", worst, 1e-6});

  double worst_unc = 0.0;
  for (const NetworkModel& net : nets) {
    const auto m = analytic::compute_metrics(net, {5.0, 0.0, 0.0});
    worst_unc = std::max(worst_unc, std::abs(m.mean_sojourn_unconditional * m.total_handoff_rate - 1.0));
  }
  out.push_back({"E[S] H = 1 on 20 random networks", worst_unc, 1e-9});

  const NetworkModel two({{0.002, 1.0, 1.0}, {0.005, 2.0, 1.0}}, 4.0);
  for (std::size_t k = 0; k < two.tier_count(); ++k) {
    out.push_back({"contact density at z = 0, closed form vs integral, tier " + std::to_string(k + 1),
                   relative(analytic::linear_contact_density_at_zero_integral(two, k),
                            analytic::linear_contact_density_at_zero(two, k)),
                   1e-6});
  }

  const double lens = geometry::lens_area(1.0, 1.0, 1.0);
  out.push_back({"lens area V(1, 1, 1)",
                 std::abs(lens - (2.0 * std::acos(0.5) - 0.5 * std::sqrt(3.0))), 1e-12});

  for (const geometry::SweptDiscQuery q : {geometry::SweptDiscQuery{20.0, std::numbers::pi / 3, 100.0, 0.8},
                                           geometry::SweptDiscQuery{20.0, std::numbers::pi / 3, 40.0, 1.2}}) {
    const double exact = geometry::swept_area(q);
    const auto raster = geometry::swept_area_oracle(q);
    out.push_back({"swept area vs raster at beta " + fmt_beta(q.beta), relative(raster.area, exact), 2e-3});
  }
  return out;
}

}  // namespace sojourn
