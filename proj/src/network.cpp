#include "sojourn/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sojourn {

NetworkModel::NetworkModel(std::vector<TierParams> tiers, double alpha)
    : tiers_(std::move(tiers)), alpha_(alpha) {
  if (tiers_.empty()) throw ValidationError("network: at least one tier is required");
  if (!(alpha_ > 2.0) || !std::isfinite(alpha_)) {
    throw ValidationError("network: alpha must be > 2 (got " + std::to_string(alpha_) + ")");
  }
  for (std::size_t k = 0; k < tiers_.size(); ++k) {
    const auto& t = tiers_[k];
    const std::string name = "network: tier " + std::to_string(k + 1);
    if (!(t.intensity > 0.0) || !std::isfinite(t.intensity)) {
      throw ValidationError(name + " intensity must be > 0");
    }
    if (!(t.power > 0.0) || !std::isfinite(t.power)) {
      throw ValidationError(name + " power must be > 0");
    }
    if (!(t.bias > 0.0) || !std::isfinite(t.bias)) {
      throw ValidationError(name + " bias must be > 0");
    }
  }

  const std::size_t n = tiers_.size();
  std::vector<double> log_bp(n);
  for (std::size_t k = 0; k < n; ++k) log_bp[k] = std::log(tiers_[k].bias * tiers_[k].power);

  // Working in log space keeps beta_kj * beta_jk == 1 to rounding.
  beta_.resize(n * n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      beta_[k * n + j] = k == j ? 1.0 : std::exp((log_bp[k] - log_bp[j]) / alpha_);
    }
  }

  // Serving BS minimizes distance * (B_k P_k)^(-1/alpha); scale so the
  // weakest tier has weight 1.
  const double min_log = *std::min_element(log_bp.begin(), log_bp.end());
  weight_.resize(n);
  for (std::size_t k = 0; k < n; ++k) weight_[k] = std::exp((min_log - log_bp[k]) / alpha_);
}

double NetworkModel::effective_density(TierIndex k) const {
  double sum = 0.0;
  for (std::size_t j = 0; j < tiers_.size(); ++j) {
    const double b = beta(j, k);
    sum += tiers_[j].intensity * b * b;
  }
  return sum;
}

NetworkModel NetworkModel::with_intensities(std::span<const double> intensities) const {
  if (intensities.size() != tiers_.size()) {
    throw ValidationError("network: intensity vector has wrong length");
  }
  auto copy = tiers_;
  for (std::size_t k = 0; k < copy.size(); ++k) copy[k].intensity = intensities[k];
  return NetworkModel(std::move(copy), alpha_);
}

void MobilityParams::validate() const {
  if (!(velocity > 0.0) || !std::isfinite(velocity)) {
    throw ValidationError("mobility: velocity must be > 0");
  }
  if (!(ttt >= 0.0)) throw ValidationError("mobility: ttt must be >= 0");
  if (!(t_p >= ttt)) throw ValidationError("mobility: t_p must be >= ttt");
}

}  // namespace sojourn
