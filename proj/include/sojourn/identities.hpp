#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sojourn/network.hpp"

namespace sojourn {

struct IdentityCheck {
  std::string name;
  double error = 0.0;
  double tolerance = 0.0;
  bool passed() const { return error < tolerance; }
};

// Random K-tier networks, K cycling through 1, 2, 3. Intensities are
// log-uniform in [1e-4, 1e-2], power and bias log-uniform in [1, 100] and
// [1, 10], alpha uniform in [2.5, 5].
std::vector<NetworkModel> random_networks(std::size_t count, std::uint64_t seed);

// Closed-form identities plus raster spot checks of the swept area.
std::vector<IdentityCheck> run_identity_suite(std::uint64_t seed = 7);

}  // namespace sojourn
