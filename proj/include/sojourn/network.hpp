#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace sojourn {

using TierIndex = std::size_t;

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TierParams {
  double intensity = 0.0;  // BSs per unit area
  double power = 1.0;
  double bias = 1.0;
};

// K-tier PPP deployment with biased max-received-power association.
class NetworkModel {
 public:
  NetworkModel(std::vector<TierParams> tiers, double alpha);

  std::size_t tier_count() const { return tiers_.size(); }
  const std::vector<TierParams>& tiers() const { return tiers_; }
  const TierParams& tier(TierIndex k) const { return tiers_.at(k); }
  double alpha() const { return alpha_; }

  // ((B_k P_k) / (B_j P_j))^(1/alpha)
  double beta(TierIndex k, TierIndex j) const { return beta_[k * tiers_.size() + j]; }

  // Multiplier applied to Euclidean distance so that the serving BS is the
  // argmin of weight * distance. Normalized so the largest weight is 1.
  double association_weight(TierIndex k) const { return weight_[k]; }

  // sum_j lambda_j beta_jk^2
  double effective_density(TierIndex k) const;

  NetworkModel with_intensities(std::span<const double> intensities) const;

 private:
  std::vector<TierParams> tiers_;
  double alpha_;
  std::vector<double> beta_;
  std::vector<double> weight_;
};

struct MobilityParams {
  double velocity = 1.0;
  double ttt = 0.0;  // time-to-trigger
  double t_p = 0.0;  // ping-pong dwell threshold

  void validate() const;
};

}  // namespace sojourn
