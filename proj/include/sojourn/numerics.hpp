#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sojourn::numerics {

struct QuadratureSpec {
  double abs_tol = 1e-9;
  double rel_tol = 1e-8;
  std::size_t max_subdivisions = 1'000'000;
  // Relative Gaussian-envelope mass dropped by integrate_halfline.
  double tail_epsilon = 1e-10;

  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
  std::size_t subdivisions = 0;
};

// Thrown by callers that treat an unconverged quadrature as fatal. The message
// names the integral that failed.
class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kClampEps = 1e-9;

// arccos with rounding drift tolerated up to kClampEps; anything larger is a
// geometry bug and raises std::domain_error.
double clamped_acos(double x);

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// Gauss-Legendre rule of order n, computed once per n and cached.
const GaussRule& gauss_legendre(std::size_t n);

namespace detail {

template <class F>
struct SimpsonState {
  F& f;
  std::size_t budget;
  std::size_t used = 0;
  double error = 0.0;
  bool converged = true;
};

// Interval [a, b] with midpoint m and cached samples; `whole` is the Simpson
// estimate over the full interval.
template <class F>
double simpson_step(SimpsonState<F>& st, double a, double b, double fa, double fm,
                    double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = st.f(lm);
  const double frm = st.f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double refined = left + right;
  const double delta = refined - whole;

  if (!std::isfinite(refined)) {
    st.converged = false;
    st.error = std::numeric_limits<double>::infinity();
    return refined;
  }
  if (std::abs(delta) <= 15.0 * tol || depth >= 60 || m == a || m == b) {
    if (std::abs(delta) > 15.0 * tol) st.converged = false;
    st.error += std::abs(delta) / 15.0;
    return refined + delta / 15.0;
  }
  if (st.used >= st.budget) {
    st.converged = false;
    st.error += std::abs(delta) / 15.0;
    return refined + delta / 15.0;
  }
  ++st.used;
  return simpson_step(st, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
         simpson_step(st, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

// Adaptive Simpson for an integrand that is finite at both endpoints.
template <class F>
QuadratureResult adaptive_simpson(F& f, double a, double b, double fa, double fb,
                                  const QuadratureSpec& spec) {
  constexpr int kPanels = 8;
  const double width = (b - a) / kPanels;

  double xs[2 * kPanels + 1];
  double fs[2 * kPanels + 1];
  for (int i = 0; i <= 2 * kPanels; ++i) xs[i] = a + 0.5 * width * i;
  xs[2 * kPanels] = b;
  fs[0] = fa;
  fs[2 * kPanels] = fb;
  for (int i = 1; i < 2 * kPanels; ++i) fs[i] = f(xs[i]);

  double coarse[kPanels];
  double estimate = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    coarse[p] = (xs[2 * p + 2] - xs[2 * p]) / 6.0 *
                (fs[2 * p] + 4.0 * fs[2 * p + 1] + fs[2 * p + 2]);
    estimate += coarse[p];
  }
  const double tol = std::max(spec.abs_tol, spec.rel_tol * std::abs(estimate));

  SimpsonState<F> st{f, spec.max_subdivisions};
  double total = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    total += simpson_step(st, xs[2 * p], xs[2 * p + 2], fs[2 * p], fs[2 * p + 1],
                          fs[2 * p + 2], coarse[p], tol / kPanels, 0);
  }
  if (!std::isfinite(total)) st.converged = false;
  return {total, st.error, st.converged, st.used};
}

}  // namespace detail

inline double square_sin_half(double phi) {
  const double s = std::sin(0.5 * phi);
  return s * s;
}

// Adaptive Simpson quadrature with Richardson error estimate.
//
// If f is not finite at an endpoint (integrable 1/sqrt singularity), the
// interval is remapped with x = (a+b)/2 - (b-a)/2 cos(phi), phi in [0, pi];
// the Jacobian (b-a)/2 sin(phi) cancels the square-root blow-up at both ends
// and the endpoints themselves are never evaluated.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
  spec.validate();
  if (!(a <= b)) throw std::invalid_argument("integrate: requires a <= b");
  if (a == b) return {};

  const double fa = f(a);
  const double fb = f(b);
  if (std::isfinite(fa) && std::isfinite(fb)) {
    return detail::adaptive_simpson(f, a, b, fa, fb, spec);
  }

  const double half = 0.5 * (b - a);
  auto mapped = [&](double phi) {
    const double s = std::sin(phi);
    if (s <= 0.0) return 0.0;
    // distance to the nearer endpoint without the 1 - cos(phi) cancellation
    const double x = phi <= 0.5 * std::numbers::pi ? a + 2.0 * half * square_sin_half(phi)
                                                    : b - 2.0 * half * square_sin_half(std::numbers::pi - phi);
    if (x <= a || x >= b) return 0.0;  // rounded onto the singular endpoint
    return f(x) * half * s;
  };
  // the mapped integrand has a finite nonzero limit at 0 and pi; sample just inside
  constexpr double kInside = 1e-7;
  return detail::adaptive_simpson(mapped, 0.0, std::numbers::pi, mapped(kInside),
                                  mapped(std::numbers::pi - kInside), spec);
}

// Integral over [0, inf) of an integrand bounded by C exp(-x^2/decay_scale^2).
// Truncates at decay_scale * sqrt(ln(1/tail_epsilon)).
template <class F>
QuadratureResult integrate_halfline(F&& f, double decay_scale, const QuadratureSpec& spec = {}) {
  spec.validate();
  if (!(decay_scale > 0.0) || !std::isfinite(decay_scale)) {
    throw std::invalid_argument("integrate_halfline: decay_scale must be positive");
  }
  const double x_max = decay_scale * std::sqrt(std::log(1.0 / spec.tail_epsilon));
  return integrate(std::forward<F>(f), 0.0, x_max, spec);
}

// Fixed-order Gauss-Legendre on [a, b], smooth in the integrand's parameters.
template <class F>
double integrate_fixed(F&& f, double a, double b, std::size_t order = 64) {
  const GaussRule& rule = gauss_legendre(order);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  }
  return sum * half;
}

}  // namespace sojourn::numerics
