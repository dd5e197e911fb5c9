#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace sojourn {

enum class CurveKind { ccdf, cdf };
enum class Provenance { analytic, empirical };

std::string_view to_string(CurveKind kind);
std::string_view to_string(Provenance provenance);

// Sampled distribution over a strictly increasing time (or length) grid.
// `stderrs` is empty for analytic curves.
struct DistributionCurve {
  std::vector<double> abscissae;
  std::vector<double> values;
  std::vector<double> stderrs;
  CurveKind kind = CurveKind::ccdf;
  Provenance provenance = Provenance::analytic;

  // Throws std::logic_error when an invariant is broken; monotonicity is
  // checked up to `slack`.
  void validate(double slack = 1e-9) const;
};

// max_i |a_i - b_i| over a shared grid.
double sup_distance(const DistributionCurve& a, const DistributionCurve& b);

std::vector<double> log_spaced(double first, double last, std::size_t count);
std::vector<double> linear_spaced(double first, double last, std::size_t count);

}  // namespace sojourn
