#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include "sojourn/execution.hpp"
#include "sojourn/numerics.hpp"

namespace sojourn::geometry {

// Straight-line sweep of the exclusion disc B(x(t), r0(t)/beta) over a
// traveled distance z, starting at serving distance r0 and angle theta between
// the serving BS and the direction of motion.
struct SweptDiscQuery {
  double r0 = 1.0;
  double theta = 0.0;
  double z = 0.0;
  double beta = 1.0;

  void validate() const;
};

enum class SweptCase {
  start_disc,      // beta < 1, end disc inside the start disc
  end_disc,        // beta < 1, start disc inside the end disc
  lens,            // beta == 1, or beta < 1 with partial overlap
  sweep_integral,  // beta > 1
};

std::string_view to_string(SweptCase c);

// Ties at the beta < 1 case boundaries resolve to the lens branch.
SweptCase classify(const SweptDiscQuery& q);

// Distance from the initial BS to the user after a fraction u of the sweep.
double chord_distance(const SweptDiscQuery& q, double u);

// Area of the intersection of two discs with radii r1, r2 and centres d apart.
double lens_area(double r1, double r2, double d);

double swept_area(const SweptDiscQuery& q, const numerics::QuadratureSpec& spec = {});

enum class DerivativeMode {
  closed_form,
  validated,  // closed form, cross-checked against a central difference
  finite_difference,
};

enum class DerivativeSource { closed_form, finite_difference };

struct DerivativeResult {
  double value = 0.0;
  DerivativeSource source = DerivativeSource::closed_form;
  double closed_form = 0.0;
  double finite_difference = 0.0;  // NaN unless computed
};

inline constexpr double kDerivativeAgreement = 1e-4;

// d|A|/dz for z > 0.
DerivativeResult swept_area_derivative(const SweptDiscQuery& q,
                                       DerivativeMode mode = DerivativeMode::validated,
                                       const numerics::QuadratureSpec& spec = {});

// Central difference of the swept area with step max(1e-6, 1e-6 z). The
// beta > 1 branch is evaluated with a fixed Gauss-Legendre rule so the
// difference quotient is not polluted by adaptive-refinement jitter.
double swept_area_derivative_fd(const SweptDiscQuery& q);

// Area and (optionally) d|A|/dz in one pass, with the beta > 1 sweep integral
// done by a fixed Gauss-Legendre rule split at the closest approach. Smooth in
// (r0, theta, z), which is what the outer double integrals need.
struct SweptEvaluation {
  double area = 0.0;
  double derivative = 0.0;
  bool fallback = false;  // derivative came from the finite difference
};

SweptEvaluation evaluate_swept(const SweptDiscQuery& q, bool with_derivative,
                               DerivativeMode mode = DerivativeMode::validated);

// Limit of d|A|/dz as z -> 0.
double swept_area_derivative_at_zero(double r0, double theta, double beta);

// (1/beta^2) int (beta^2 + 1 - 2cos^2) / sqrt(beta^2 - cos^2) dtheta over
// [0, pi] for beta >= 1 and [acos beta, pi - acos beta] for beta < 1.
double shape_integral_I(double beta, const numerics::QuadratureSpec& spec = {});

// (1/beta^2) int_0^pi sqrt(beta^2 + 1 - 2 beta cos theta) dtheta
double shape_integral_F(double beta, const numerics::QuadratureSpec& spec = {});

struct Disc {
  double x = 0.0;
  double y = 0.0;
  double r = 0.0;
};

struct RasterEstimate {
  double area = 0.0;
  double error_band = 0.0;  // perimeter-of-bounding-box times cell size
  std::size_t covered_cells = 0;
  double cell_size = 0.0;
};

struct RasterGrid {
  double x_min = 0.0;
  double y_min = 0.0;
  double cell = 1.0;
  std::size_t nx = 0;
  std::size_t ny = 0;
};

// Grid with at least `resolution` cells along each axis of the discs' joint
// bounding box (square cells).
RasterGrid grid_for(std::span<const Disc> discs, std::size_t resolution);

// Counts cell centres covered by the union of discs. The parallel kernel
// splits rows across OpenMP threads and reduces integer counts, so it returns
// the same value as the serial reference.
RasterEstimate raster_union_area(std::span<const Disc> discs, const RasterGrid& grid,
                                 Execution exec = Execution::parallel);

// Rasterized area of the union of B((z u_i, 0), g(z, u_i)/beta), u_i = i/n.
RasterEstimate swept_area_oracle(const SweptDiscQuery& q, std::size_t n_discs = 2048,
                                 std::size_t grid_resolution = 4096,
                                 Execution exec = Execution::parallel);

}  // namespace sojourn::geometry
