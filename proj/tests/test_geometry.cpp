#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "sojourn/swept_geometry.hpp"

using namespace sojourn;
using namespace sojourn::geometry;
using std::numbers::pi;

namespace {

double two_end_union(const SweptDiscQuery& q) {
  const double r1 = q.r0 / q.beta;
  const double r2 = chord_distance(q, 1.0) / q.beta;
  return pi * r1 * r1 + pi * r2 * r2 - lens_area(r1, r2, q.z);
}

double relerr(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(ChordDistance, Examples) {
  EXPECT_NEAR(chord_distance({1.0, 0.0, 1.0, 1.0}, 1.0), 0.0, 1e-12);
  EXPECT_NEAR(chord_distance({1.0, pi, 2.0, 1.0}, 1.0), 3.0, 1e-12);
  // BS at (10, 10 sqrt 3), user ends at (100, 0)
  EXPECT_NEAR(chord_distance({20.0, pi / 3.0, 100.0, 1.0}, 1.0), std::hypot(90.0, 10.0 * std::sqrt(3.0)), 1e-9);
  EXPECT_NEAR(chord_distance({20.0, pi / 3.0, 100.0, 1.0}, 0.5), std::hypot(40.0, 10.0 * std::sqrt(3.0)), 1e-9);
}

TEST(LensArea, Examples) {
  EXPECT_NEAR(lens_area(1.0, 1.0, 0.0), pi, 1e-14);
  EXPECT_NEAR(lens_area(1.0, 1.0, 2.0), 0.0, 1e-14);
  EXPECT_NEAR(lens_area(1.0, 1.0, 1.0), 2.0 * std::acos(0.5) - 0.5 * std::sqrt(3.0), 1e-14);
  EXPECT_NEAR(lens_area(3.0, 1.0, 1.0), pi, 1e-14);  // nested
  EXPECT_THROW(lens_area(-1.0, 1.0, 1.0), std::invalid_argument);
}

TEST(LensArea, RasterOracle) {
  const std::vector<Disc> a{{0.0, 0.0, 1.0}};
  const std::vector<Disc> b{{1.0, 0.0, 1.0}};
  const std::vector<Disc> both{{0.0, 0.0, 1.0}, {1.0, 0.0, 1.0}};
  const RasterGrid g = grid_for(both, 4000);
  const double ua = raster_union_area(a, g).area;
  const double ub = raster_union_area(b, g).area;
  const double uab = raster_union_area(both, g).area;
  EXPECT_NEAR(ua + ub - uab, lens_area(1.0, 1.0, 1.0), 1e-3);
}

TEST(SweptArea, ZeroTravel) {
  for (double beta : {0.5, 1.0, 2.0}) {
    EXPECT_NEAR(swept_area({3.0, 1.0, 0.0, beta}), pi * 9.0 / (beta * beta), 1e-12);
  }
}

TEST(SweptArea, TangentUnitDiscs) {
  EXPECT_NEAR(swept_area({1.0, 0.0, 2.0, 1.0}), 2.0 * pi, 1e-12);
}

TEST(SweptArea, RasterOracleExamples) {
  const SweptDiscQuery lens{20.0, pi / 3.0, 100.0, 0.8};
  ASSERT_EQ(classify(lens), SweptCase::lens);
  const double a = swept_area(lens);
  EXPECT_NEAR(a, two_end_union(lens), 1e-9 * a);
  const RasterEstimate ra = swept_area_oracle(lens);
  EXPECT_LT(relerr(a, ra.area), 1e-3);
  EXPECT_LE(std::abs(a - ra.area), ra.error_band);

  const SweptDiscQuery sweep{20.0, pi / 3.0, 40.0, 1.2};
  ASSERT_EQ(classify(sweep), SweptCase::sweep_integral);
  const double s = swept_area(sweep);
  EXPECT_LT(relerr(s, swept_area_oracle(sweep).area), 1e-3);
  // frozen
  EXPECT_NEAR(a, 41557.5670134, 1e-6);
  EXPECT_NEAR(s, 3448.54631838, 1e-6);
}

TEST(SweptArea, Classification) {
  // beta < 1 boundaries at z = 2 r0 (cos(theta) -+ beta) / (1 - beta^2)
  const double beta = 0.5, r0 = 1.0, theta = 0.3;
  const double c = std::cos(theta);
  const double z_lo = 2.0 * r0 * (c - beta) / (1.0 - beta * beta);
  const double z_hi = 2.0 * r0 * (c + beta) / (1.0 - beta * beta);
  EXPECT_EQ(classify({r0, theta, 0.5 * z_lo, beta}), SweptCase::start_disc);
  EXPECT_EQ(classify({r0, theta, z_lo, beta}), SweptCase::lens);
  EXPECT_EQ(classify({r0, theta, 0.5 * (z_lo + z_hi), beta}), SweptCase::lens);
  EXPECT_EQ(classify({r0, theta, z_hi, beta}), SweptCase::lens);
  EXPECT_EQ(classify({r0, theta, 2.0 * z_hi, beta}), SweptCase::end_disc);
  EXPECT_EQ(classify({r0, theta, 1.0, 1.0}), SweptCase::lens);
  EXPECT_EQ(classify({r0, theta, 1.0, 1.5}), SweptCase::sweep_integral);
  EXPECT_EQ(to_string(SweptCase::sweep_integral), "sweep_integral");
}

TEST(SweptArea, CaseBoundaryContinuity) {
  for (double beta : {0.3, 0.5, 0.8409}) {
    for (double theta : {0.0, 0.2, 0.5}) {
      if (theta >= std::acos(beta)) continue;
      const double r0 = 2.0;
      const double c = std::cos(theta);
      for (double sign : {-1.0, 1.0}) {
        const double zb = 2.0 * r0 * (c + sign * beta) / (1.0 - beta * beta);
        const double eps = 1e-10 * zb;
        const double below = swept_area({r0, theta, zb - eps, beta});
        const double above = swept_area({r0, theta, zb + eps, beta});
        EXPECT_LT(relerr(below, above), 1e-8) << beta << " " << theta << " " << sign;
      }
    }
  }
}

TEST(SweptArea, MonotoneAndLowerBound) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const double beta = 0.3 + 2.5 * u(rng);
    const double r0 = 0.1 + 10.0 * u(rng);
    const double theta = pi * u(rng);
    double prev = 0.0;
    for (int i = 0; i <= 40; ++i) {
      const SweptDiscQuery q{r0, theta, 0.75 * i, beta};
      const double a = swept_area(q);
      EXPECT_GE(a, prev * (1.0 - 1e-12));
      const double g = chord_distance(q, 1.0);
      EXPECT_GE(a, pi * std::max(r0 * r0, g * g) / (beta * beta) * (1.0 - 1e-12));
      prev = a;
    }
  }
}

TEST(SweptArea, TwoEndDiscsSufficeUpToUnitBeta) {
  // same raster grid, all intermediate discs vs the two end discs only
  for (const SweptDiscQuery q : {SweptDiscQuery{20.0, pi / 3.0, 100.0, 0.8}, SweptDiscQuery{1.0, 1.2, 3.0, 1.0},
                                 SweptDiscQuery{2.0, 0.3, 1.5, 0.6}}) {
    std::vector<Disc> all, ends;
    const std::size_t n = 512;
    for (std::size_t i = 0; i <= n; ++i) {
      const double u = static_cast<double>(i) / n;
      all.push_back({q.z * u, 0.0, chord_distance(q, u) / q.beta});
    }
    ends.push_back(all.front());
    ends.push_back(all.back());
    const RasterGrid g = grid_for(all, 1024);
    EXPECT_EQ(raster_union_area(all, g).covered_cells, raster_union_area(ends, g).covered_cells);
  }
}

TEST(SweptArea, DilationCovariance) {
  const double c = 3.7;
  for (const SweptDiscQuery q : {SweptDiscQuery{1.0, 0.4, 0.3, 0.6}, SweptDiscQuery{1.0, 1.0, 2.0, 1.0},
                                 SweptDiscQuery{2.0, 2.0, 5.0, 1.4}}) {
    SweptDiscQuery s = q;
    s.r0 *= c;
    s.z *= c;
    EXPECT_LT(relerr(swept_area(s), c * c * swept_area(q)), 1e-8);
    const double d = swept_area_derivative(q, DerivativeMode::closed_form).value;
    EXPECT_LT(relerr(swept_area_derivative(s, DerivativeMode::closed_form).value, c * d), 1e-7);
  }
}

TEST(Raster, SerialMatchesParallel) {
  const SweptDiscQuery q{20.0, pi / 3.0, 40.0, 1.2};
  const RasterEstimate s = swept_area_oracle(q, 512, 1024, Execution::serial);
  const RasterEstimate p = swept_area_oracle(q, 512, 1024, Execution::parallel);
  EXPECT_EQ(s.covered_cells, p.covered_cells);
  EXPECT_EQ(s.area, p.area);
}

TEST(Raster, ZeroTravelWithinBand) {
  const SweptDiscQuery q{5.0, 1.0, 0.0, 0.7};
  const RasterEstimate r = swept_area_oracle(q, 16, 2048);
  EXPECT_LE(std::abs(r.area - pi * 25.0 / 0.49), r.error_band);
}

TEST(Derivative, StartDiscBranchIsZero) {
  const SweptDiscQuery q{2.0, 0.1, 0.5, 0.5};
  ASSERT_EQ(classify(q), SweptCase::start_disc);
  EXPECT_EQ(swept_area_derivative(q).value, 0.0);
}

TEST(Derivative, MatchesCentralDifference) {
  const SweptDiscQuery a{1.0, pi / 2.0, 1.0, 1.0};
  const auto da = swept_area_derivative(a, DerivativeMode::closed_form);
  EXPECT_LT(relerr(da.value, swept_area_derivative_fd(a)), 1e-5);
  // beta = 1, theta = pi/2: A(z) = pi/2 + (1 + z^2) psi + z, psi = pi - atan(1/z)
  EXPECT_NEAR(da.value, 1.5 * pi + 2.0, 1e-9);

  const SweptDiscQuery b{20.0, pi / 3.0, 40.0, 1.2};
  const auto db = swept_area_derivative(b, DerivativeMode::closed_form);
  EXPECT_LT(relerr(db.value, swept_area_derivative_fd(b)), 1e-5);
}

TEST(Derivative, RandomizedConsistency) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const SweptDiscQuery q{0.1 + 10.0 * u(rng), pi * u(rng), 0.05 + 20.0 * u(rng), 0.3 + 2.5 * u(rng)};
    const auto d = swept_area_derivative(q);
    EXPECT_TRUE(std::isfinite(d.value));
    if (d.source != DerivativeSource::closed_form) continue;
    const double scale = std::max({std::abs(d.closed_form), (q.r0 + q.z) / (q.beta * q.beta)});
    EXPECT_LE(std::abs(d.closed_form - d.finite_difference), kDerivativeAgreement * scale);
    ++checked;
  }
  EXPECT_GT(checked, 390);
}

TEST(Derivative, NearTangencyAtUnitBeta) {
  // the law-of-cosines form loses every digit here; the answer is ~0
  const SweptDiscQuery q{14.0, 2.6e-6, 0.0937, 1.0};
  const auto d = swept_area_derivative(q);
  EXPECT_EQ(d.source, DerivativeSource::closed_form);
  EXPECT_NEAR(d.value, 0.0, 1e-6);
}

TEST(Derivative, ModesAndEvaluateSweptAgree) {
  for (const SweptDiscQuery q : {SweptDiscQuery{1.0, 0.4, 0.6, 0.6}, SweptDiscQuery{3.0, 2.0, 1.0, 0.6},
                                 SweptDiscQuery{1.0, 1.0, 2.0, 1.0}, SweptDiscQuery{2.0, 2.0, 5.0, 1.4},
                                 SweptDiscQuery{2.0, 0.0, 5.0, 1.4}}) {
    const SweptEvaluation e = evaluate_swept(q, true);
    EXPECT_FALSE(e.fallback);
    EXPECT_LT(relerr(e.area, swept_area(q)), 1e-9);
    const double cf = swept_area_derivative(q, DerivativeMode::closed_form).value;
    EXPECT_NEAR(e.derivative, cf, 1e-7 * std::max(1.0, std::abs(cf)));
    EXPECT_NEAR(swept_area_derivative(q, DerivativeMode::finite_difference).value, cf,
                1e-4 * std::max(1.0, std::abs(cf)));
  }
  EXPECT_THROW(swept_area_derivative({1.0, 1.0, 0.0, 1.0}), std::invalid_argument);
}

TEST(DerivativeAtZero, Examples) {
  EXPECT_NEAR(swept_area_derivative_at_zero(1.0, pi / 2.0, 1.0), 2.0, 1e-14);
  EXPECT_EQ(swept_area_derivative_at_zero(1.0, 0.0, 0.5), 0.0);
  EXPECT_NEAR(swept_area_derivative_at_zero(1.0, 0.0, 2.0), (std::sqrt(3.0) - pi / 3.0) / 2.0, 1e-14);
  // small-z finite difference
  const SweptDiscQuery q{1.0, 0.0, 1e-6, 2.0};
  EXPECT_NEAR((swept_area(q) - swept_area({1.0, 0.0, 0.0, 2.0})) / 1e-6, 0.3424266281861, 1e-5);
}

TEST(DerivativeAtZero, IntegratesToShapeIntegral) {
  for (double beta : {0.5, 0.8409, 1.0, 1.5}) {
    const double r0 = 1.3;
    const auto r = numerics::integrate(
        [&](double t) { return swept_area_derivative_at_zero(r0, t, beta); }, 0.0, pi);
    EXPECT_NEAR(r.value, 2.0 * r0 * shape_integral_I(beta), 1e-6) << beta;
  }
}

TEST(ShapeIntegrals, Examples) {
  EXPECT_NEAR(shape_integral_I(1.0), 4.0, 1e-8);
  EXPECT_NEAR(shape_integral_F(1.0), 4.0, 1e-8);
  double riemann = 0.0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) riemann += std::sqrt(5.0 - 4.0 * std::cos((i + 0.5) * pi / n));
  riemann *= pi / n / 4.0;
  EXPECT_NEAR(shape_integral_F(2.0), riemann, 1e-8);
  EXPECT_NEAR(shape_integral_F(0.5), 8.0 * shape_integral_F(2.0), 1e-8);
  EXPECT_NEAR(shape_integral_I(0.5), 8.0 * shape_integral_I(2.0), 1e-6);
}

TEST(ShapeIntegrals, IEqualsF) {
  for (double beta = 0.5; beta <= 4.0 + 1e-12; beta += 0.125) {
    EXPECT_NEAR(shape_integral_I(beta), shape_integral_F(beta), 1e-6) << beta;
  }
  EXPECT_NEAR(shape_integral_I(0.8409), shape_integral_F(0.8409), 1e-6);
}

TEST(ShapeIntegrals, Scaling) {
  for (double beta : {1.1, 1.5, 2.0, 4.0}) {
    const double b3 = beta * beta * beta;
    EXPECT_NEAR(shape_integral_F(1.0 / beta), b3 * shape_integral_F(beta), 1e-6);
    EXPECT_NEAR(shape_integral_I(1.0 / beta), b3 * shape_integral_I(beta), 1e-6);
  }
}

TEST(SweptDiscQuery, Validation) {
  EXPECT_THROW(swept_area({0.0, 1.0, 1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(swept_area({1.0, -0.1, 1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(swept_area({1.0, 1.0, -1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(swept_area({1.0, 1.0, 1.0, 0.0}), std::invalid_argument);
}
