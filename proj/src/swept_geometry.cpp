#include "sojourn/swept_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sojourn::geometry {

namespace {

using numerics::clamped_acos;
constexpr double kPi = std::numbers::pi;

double square(double x) { return x * x; }

// beta^2 g^2 - s^2 rewritten as (beta^2 - 1) g^2 + r0^2 sin^2(theta), which is
// free of cancellation when beta is near 1.
double sweep_discriminant(double beta, double g, double r0, double sin_theta) {
  return std::max(0.0, (beta * beta - 1.0) * g * g + square(r0 * sin_theta));
}

struct SweepTerms {
  double phi;    // integrand of the area
  double dphi;   // partial derivative of phi with respect to z
};

SweepTerms sweep_terms(const SweptDiscQuery& q, double cos_t, double sin_t, double u) {
  const double s = q.z * u - q.r0 * cos_t;
  const double g = std::hypot(s, q.r0 * sin_t);
  if (g == 0.0) return {0.0, 0.0};
  const double root = std::sqrt(sweep_discriminant(q.beta, g, q.r0, sin_t));
  const double angle = clamped_acos(s / (q.beta * g));
  return {root - angle * s, u * (root * s / (g * g) - angle)};
}

struct SweepSums {
  double area = 0.0;        // int_0^1 phi du
  double derivative = 0.0;  // int_0^1 (phi + z dphi/dz) du
};

SweepSums fixed_sweep_sums(const SweptDiscQuery& q, double cos_t, double sin_t) {
  SweepSums out;
  auto add = [&](double a, double b) {
    const auto& rule = numerics::gauss_legendre(64);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const SweepTerms t = sweep_terms(q, cos_t, sin_t, mid + half * rule.nodes[i]);
      out.area += rule.weights[i] * half * t.phi;
      out.derivative += rule.weights[i] * half * (t.phi + q.z * t.dphi);
    }
  };
  const double split = q.r0 * cos_t / q.z;
  if (split > 0.0 && split < 1.0) {
    add(0.0, split);
    add(split, 1.0);
  } else {
    add(0.0, 1.0);
  }
  return out;
}

double two_disc_union(double r1, double r2, double d) {
  return kPi * r1 * r1 + kPi * r2 * r2 - lens_area(r1, r2, d);
}

// beta = 1: both circles pass through the BS, so the lens half-angles are
// theta and the exterior angle at the end point. Exact near tangency.
double unit_beta_union(const SweptDiscQuery& q) {
  const double r0 = q.r0;
  const double z = q.z;
  const double sh = std::sin(0.5 * q.theta);
  const double st = std::sin(q.theta);
  const double g2 = square(r0 - z) + 4.0 * r0 * z * sh * sh;
  const double psi = std::atan2(r0 * st, r0 * std::cos(q.theta) - z);
  return r0 * r0 * (kPi - q.theta) + g2 * psi + r0 * z * st;
}

double lens_union(const SweptDiscQuery& q, double g1) {
  if (q.beta == 1.0) return unit_beta_union(q);
  return two_disc_union(q.r0 / q.beta, g1 / q.beta, q.z);
}


// Area with the beta > 1 sweep integral done by a fixed rule, split at the
// point of closest approach so the rule stays accurate when g(z, u) dips to 0.
double smooth_swept_area(const SweptDiscQuery& q) {
  if (q.z == 0.0) return kPi * square(q.r0 / q.beta);
  const SweptCase c = classify(q);
  const double b2 = q.beta * q.beta;
  const double g1 = chord_distance(q, 1.0);
  switch (c) {
    case SweptCase::start_disc:
      return kPi * q.r0 * q.r0 / b2;
    case SweptCase::end_disc:
      return kPi * g1 * g1 / b2;
    case SweptCase::lens:
      return lens_union(q, g1);
    case SweptCase::sweep_integral:
      break;
  }
  const double cos_t = std::cos(q.theta);
  const double sin_t = std::sin(q.theta);
  const double integral = fixed_sweep_sums(q, cos_t, sin_t).area;
  return kPi * g1 * g1 / b2 + 2.0 * q.z / b2 * integral;
}

double lens_derivative_closed_form(const SweptDiscQuery& q) {
  const double r0 = q.r0;
  const double z = q.z;
  const double b = q.beta;
  const double b2 = b * b;
  const double c = std::cos(q.theta);
  const double g = chord_distance(q, 1.0);

  const double e = b2 - 1.0;
  const double sn = std::sin(q.theta);
  // b^2 - c^2 and b -+ c without cancellation near beta = 1, theta in {0, pi}
  const double bc2 = e + sn * sn;
  const double bmc = c > 0.0 ? bc2 / (b + c) : b - c;
  const double bpc = c < 0.0 ? bc2 / (b - c) : b + c;
  // both square roots below share this discriminant once expanded
  const double root = std::sqrt(std::max(0.0, 4.0 * r0 * r0 * bc2 - e * z * (e * z + 4.0 * r0 * c)));

  const double grow = 2.0 * kPi * (z - r0 * c) / b2;
  const double t2 = (e / b2 * r0 * r0) / root;
  const double t3 = ((b2 + 1.0 - 2.0 * c * c) / b2 * r0 * r0 - e / b2 * r0 * z * c) / root;
  const double t4 = -clamped_acos(((b2 + 1.0) * z - 2.0 * r0 * c) / (2.0 * b * g)) * 2.0 *
                    (z - r0 * c) / b2;
  const double p = -e * z + 2.0 * r0 * bmc;
  const double qq = e * z + 2.0 * r0 * bpc;
  const double t5 = std::sqrt(p / qq) * (e * z + r0 * bpc) / (2.0 * b2);
  const double t6 = std::sqrt(qq / p) * (-e * z + r0 * bmc) / (2.0 * b2);
  return grow + t2 + t3 + t4 + t5 + t6;
}

double sweep_derivative_closed_form(const SweptDiscQuery& q, const numerics::QuadratureSpec& spec) {
  const double b2 = q.beta * q.beta;
  const double cos_t = std::cos(q.theta);
  const double sin_t = std::sin(q.theta);
  auto integrand = [&](double u) {
    const SweepTerms t = sweep_terms(q, cos_t, sin_t, u);
    return t.phi + q.z * t.dphi;
  };
  const auto res = numerics::integrate(integrand, 0.0, 1.0, spec);
  if (!res.converged) {
    throw numerics::QuadratureError("swept_area_derivative: sweep integral did not converge");
  }
  return 2.0 * kPi * (q.z - q.r0 * cos_t) / b2 + 2.0 / b2 * res.value;
}

}  // namespace

void SweptDiscQuery::validate() const {
  if (!(r0 > 0.0) || !std::isfinite(r0)) throw std::invalid_argument("SweptDiscQuery: r0 must be > 0");
  if (!(z >= 0.0) || !std::isfinite(z)) throw std::invalid_argument("SweptDiscQuery: z must be >= 0");
  if (!(theta >= 0.0 && theta <= kPi)) {
    throw std::invalid_argument("SweptDiscQuery: theta must lie in [0, pi]");
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("SweptDiscQuery: beta must be > 0");
  }
}

std::string_view to_string(SweptCase c) {
  switch (c) {
    case SweptCase::start_disc: return "start_disc";
    case SweptCase::end_disc: return "end_disc";
    case SweptCase::lens: return "lens";
    case SweptCase::sweep_integral: return "sweep_integral";
  }
  return "unknown";
}

SweptCase classify(const SweptDiscQuery& q) {
  if (q.beta > 1.0) return SweptCase::sweep_integral;
  if (q.beta == 1.0) return SweptCase::lens;
  const double c = std::cos(q.theta);
  const double denom = 1.0 - q.beta * q.beta;
  const double lower = 2.0 * q.r0 * (c - q.beta) / denom;
  const double upper = 2.0 * q.r0 * (c + q.beta) / denom;
  if (q.z < lower) return SweptCase::start_disc;
  if (q.z > upper) return SweptCase::end_disc;
  return SweptCase::lens;
}

double chord_distance(const SweptDiscQuery& q, double u) {
  return std::hypot(q.z * u - q.r0 * std::cos(q.theta), q.r0 * std::sin(q.theta));
}

double lens_area(double r1, double r2, double d) {
  if (!(r1 >= 0.0) || !(r2 >= 0.0) || !(d >= 0.0)) {
    throw std::invalid_argument("lens_area: radii and distance must be non-negative");
  }
  if (d >= r1 + r2) return 0.0;
  if (d <= std::abs(r1 - r2)) return kPi * square(std::min(r1, r2));
  const double a1 = clamped_acos((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1));
  const double a2 = clamped_acos((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2));
  const double k = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
  return r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * std::sqrt(std::max(0.0, k));
}

double swept_area(const SweptDiscQuery& q, const numerics::QuadratureSpec& spec) {
  q.validate();
  const double b2 = q.beta * q.beta;
  if (q.z == 0.0) return kPi * q.r0 * q.r0 / b2;

  const double g1 = chord_distance(q, 1.0);
  switch (classify(q)) {
    case SweptCase::start_disc:
      return kPi * q.r0 * q.r0 / b2;
    case SweptCase::end_disc:
      return kPi * g1 * g1 / b2;
    case SweptCase::lens:
      return lens_union(q, g1);
    case SweptCase::sweep_integral:
      break;
  }

  const double cos_t = std::cos(q.theta);
  const double sin_t = std::sin(q.theta);
  auto phi = [&](double u) { return sweep_terms(q, cos_t, sin_t, u).phi; };
  const auto res = numerics::integrate(phi, 0.0, 1.0, spec);
  if (!res.converged) throw numerics::QuadratureError("swept_area: sweep integral did not converge");
  return kPi * g1 * g1 / b2 + 2.0 * q.z / b2 * res.value;
}

static double central_difference(const SweptDiscQuery& q, double h) {
  auto at = [&](double z) {
    SweptDiscQuery shifted = q;
    shifted.z = z;
    return smooth_swept_area(shifted);
  };
  if (q.z - h < 0.0) {
    return (-3.0 * at(q.z) + 4.0 * at(q.z + h) - at(q.z + 2.0 * h)) / (2.0 * h);
  }
  return (at(q.z + h) - at(q.z - h)) / (2.0 * h);
}

double swept_area_derivative_fd(const SweptDiscQuery& q) {
  q.validate();
  return central_difference(q, std::max(1e-6, 1e-6 * q.z));
}

static bool closed_form_accepted(const SweptDiscQuery& q, double closed, double fd) {
  if (!std::isfinite(closed)) return false;
  const double scale = std::max({std::abs(closed), std::abs(fd), (q.r0 + q.z) / (q.beta * q.beta)});
  const double tol = kDerivativeAgreement * scale;
  if (std::abs(closed - fd) <= tol) return true;
  // far from the origin the small step is dominated by roundoff in the area
  // (acos near +-1), so a miss is re-checked with a wider step
  const double h = std::max(1e-6, 1e-6 * q.z);
  if (std::abs(closed - central_difference(q, 100.0 * h)) <= tol) return true;
  // next to a case boundary the derivative has a square-root kink and no fixed
  // step is accurate; accept if the difference converges onto the closed form
  double prev = std::abs(closed - fd);
  double step = h;
  for (int i = 0; i < 3; ++i) {
    step *= 0.1;
    const double err = std::abs(closed - central_difference(q, step));
    if (err <= tol) return true;
    if (!(err < 0.5 * prev)) return false;
    prev = err;
  }
  return false;
}

DerivativeResult swept_area_derivative(const SweptDiscQuery& q, DerivativeMode mode,
                                       const numerics::QuadratureSpec& spec) {
  q.validate();
  if (!(q.z > 0.0)) {
    throw std::invalid_argument("swept_area_derivative: z must be > 0 (use the z = 0 limit)");
  }
  DerivativeResult out;
  out.finite_difference = std::numeric_limits<double>::quiet_NaN();

  if (mode == DerivativeMode::finite_difference) {
    out.finite_difference = swept_area_derivative_fd(q);
    out.closed_form = std::numeric_limits<double>::quiet_NaN();
    out.value = out.finite_difference;
    out.source = DerivativeSource::finite_difference;
    return out;
  }

  const double b2 = q.beta * q.beta;
  switch (classify(q)) {
    case SweptCase::start_disc:
      out.closed_form = 0.0;
      break;
    case SweptCase::end_disc:
      out.closed_form = 2.0 * kPi * (q.z - q.r0 * std::cos(q.theta)) / b2;
      break;
    case SweptCase::lens:
      out.closed_form = lens_derivative_closed_form(q);
      break;
    case SweptCase::sweep_integral:
      out.closed_form = sweep_derivative_closed_form(q, spec);
      break;
  }
  out.value = out.closed_form;
  out.source = DerivativeSource::closed_form;
  if (mode == DerivativeMode::closed_form) return out;

  out.finite_difference = swept_area_derivative_fd(q);
  if (!closed_form_accepted(q, out.closed_form, out.finite_difference)) {
    out.value = out.finite_difference;
    out.source = DerivativeSource::finite_difference;
  }
  return out;
}

SweptEvaluation evaluate_swept(const SweptDiscQuery& q, bool with_derivative,
                               DerivativeMode mode) {
  SweptEvaluation out;
  const double b2 = q.beta * q.beta;
  if (q.z == 0.0 || !with_derivative) {
    out.area = smooth_swept_area(q);
    if (with_derivative) out.derivative = swept_area_derivative_at_zero(q.r0, q.theta, q.beta);
    return out;
  }
  if (mode == DerivativeMode::finite_difference) {
    out.area = smooth_swept_area(q);
    out.derivative = swept_area_derivative_fd(q);
    out.fallback = true;
    return out;
  }
  const double g1 = chord_distance(q, 1.0);
  const double cos_t = std::cos(q.theta);
  switch (classify(q)) {
    case SweptCase::start_disc:
      out.area = kPi * q.r0 * q.r0 / b2;
      out.derivative = 0.0;
      break;
    case SweptCase::end_disc:
      out.area = kPi * g1 * g1 / b2;
      out.derivative = 2.0 * kPi * (q.z - q.r0 * cos_t) / b2;
      break;
    case SweptCase::lens:
      out.area = lens_union(q, g1);
      out.derivative = lens_derivative_closed_form(q);
      break;
    case SweptCase::sweep_integral: {
      const SweepSums sums = fixed_sweep_sums(q, cos_t, std::sin(q.theta));
      out.area = kPi * g1 * g1 / b2 + 2.0 * q.z / b2 * sums.area;
      out.derivative = 2.0 * kPi * (q.z - q.r0 * cos_t) / b2 + 2.0 / b2 * sums.derivative;
      break;
    }
  }
  if (mode == DerivativeMode::validated) {
    const double fd = swept_area_derivative_fd(q);
    if (!closed_form_accepted(q, out.derivative, fd)) {
      out.derivative = fd;
      out.fallback = true;
    }
  }
  return out;
}

double swept_area_derivative_at_zero(double r0, double theta, double beta) {
  if (!(r0 > 0.0)) throw std::invalid_argument("swept_area_derivative_at_zero: r0 must be > 0");
  if (!(beta > 0.0)) throw std::invalid_argument("swept_area_derivative_at_zero: beta must be > 0");
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double b2 = beta * beta;
  const bool middle = beta >= 1.0 || (theta > std::acos(beta) && theta < kPi - std::acos(beta));
  if (middle) {
    const double root = std::sqrt(std::max(0.0, b2 - 1.0 + s * s));
    return 2.0 * r0 / b2 * (root - c * clamped_acos(c / beta));
  }
  if (theta <= std::acos(beta)) return 0.0;
  return -2.0 * kPi * r0 * c / b2;
}

double shape_integral_F(double beta, const numerics::QuadratureSpec& spec) {
  if (!(beta > 0.0)) throw std::invalid_argument("shape_integral_F: beta must be > 0");
  // beta^2 + 1 - 2 beta cos = (beta - 1)^2 + 4 beta sin^2(theta/2)
  auto f = [beta](double theta) {
    return std::sqrt(square(beta - 1.0) + 4.0 * beta * square(std::sin(0.5 * theta)));
  };
  const auto res = numerics::integrate(f, 0.0, kPi, spec);
  if (!res.converged) throw numerics::QuadratureError("shape_integral_F did not converge");
  return res.value / (beta * beta);
}

double shape_integral_I(double beta, const numerics::QuadratureSpec& spec) {
  if (!(beta > 0.0)) throw std::invalid_argument("shape_integral_I: beta must be > 0");
  const double b2 = beta * beta;
  numerics::QuadratureResult res;
  if (beta >= 1.0) {
    auto f = [b2](double theta) {
      const double s2 = square(std::sin(theta));
      const double den = std::sqrt(b2 - 1.0 + s2);
      return den == 0.0 ? 0.0 : (b2 - 1.0 + 2.0 * s2) / den;
    };
    res = numerics::integrate(f, 0.0, kPi, spec);
    res.value /= b2;
  } else {
    // cos(theta) = beta sin(phi) maps [acos beta, pi - acos beta] onto
    // phi in [-pi/2, pi/2] and removes the 1/sqrt endpoint singularities.
    auto f = [b2](double phi) {
      const double s2 = square(std::sin(phi));
      return (1.0 + b2 - 2.0 * b2 * s2) / std::sqrt(1.0 - b2 * s2);
    };
    res = numerics::integrate(f, 0.0, 0.5 * kPi, spec);
    res.value *= 2.0 / b2;
  }
  if (!res.converged) throw numerics::QuadratureError("shape_integral_I did not converge");
  return res.value;
}

}  // namespace sojourn::geometry
