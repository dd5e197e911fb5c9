#include "sojourn/curve.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sojourn {

std::string_view to_string(CurveKind kind) {
  return kind == CurveKind::ccdf ? "ccdf" : "cdf";
}

std::string_view to_string(Provenance provenance) {
  return provenance == Provenance::analytic ? "analytic" : "empirical";
}

void DistributionCurve::validate(double slack) const {
  if (abscissae.size() != values.size()) throw std::logic_error("curve: length mismatch");
  if (!stderrs.empty() && stderrs.size() != values.size()) {
    throw std::logic_error("curve: stderr length mismatch");
  }
  for (std::size_t i = 0; i < abscissae.size(); ++i) {
    if (!(abscissae[i] >= 0.0)) throw std::logic_error("curve: negative abscissa");
    if (i > 0 && !(abscissae[i] > abscissae[i - 1])) {
      throw std::logic_error("curve: abscissae not strictly increasing");
    }
    if (!(values[i] >= 0.0 && values[i] <= 1.0)) {
      throw std::logic_error("curve: probability outside [0, 1] at index " + std::to_string(i));
    }
    if (i > 0) {
      const double step = values[i] - values[i - 1];
      if (kind == CurveKind::ccdf ? step > slack : step < -slack) {
        throw std::logic_error("curve: monotonicity violated at index " + std::to_string(i));
      }
    }
  }
}

double sup_distance(const DistributionCurve& a, const DistributionCurve& b) {
  if (a.abscissae != b.abscissae) throw std::invalid_argument("sup_distance: grids differ");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
  }
  return worst;
}

std::vector<double> log_spaced(double first, double last, std::size_t count) {
  if (!(first > 0.0) || !(last > first) || count < 2) {
    throw std::invalid_argument("log_spaced: need 0 < first < last and count >= 2");
  }
  std::vector<double> out(count);
  const double lf = std::log(first);
  const double step = (std::log(last) - lf) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = std::exp(lf + step * static_cast<double>(i));
  out.front() = first;
  out.back() = last;
  return out;
}

std::vector<double> linear_spaced(double first, double last, std::size_t count) {
  if (!(last > first) || count < 2) {
    throw std::invalid_argument("linear_spaced: need first < last and count >= 2");
  }
  std::vector<double> out(count);
  const double step = (last - first) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = first + step * static_cast<double>(i);
  out.back() = last;
  return out;
}

}  // namespace sojourn
