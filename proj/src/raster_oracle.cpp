#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sojourn/swept_geometry.hpp"

namespace sojourn::geometry {

namespace {

using Span = std::pair<std::int64_t, std::int64_t>;  // inclusive cell range

// Covered cell centres in one row: each disc contributes the cells whose
// centre satisfies |x_c - x| < half-chord; spans are merged in integer space.
std::int64_t count_row(std::span<const Disc> discs, const RasterGrid& grid, std::size_t row,
                       std::vector<Span>& scratch) {
  scratch.clear();
  const double y = grid.y_min + (static_cast<double>(row) + 0.5) * grid.cell;
  const auto last = static_cast<std::int64_t>(grid.nx) - 1;
  for (const Disc& d : discs) {
    const double dy = y - d.y;
    const double h2 = d.r * d.r - dy * dy;
    if (h2 <= 0.0) continue;
    const double half = std::sqrt(h2);
    // centre of cell i is x_min + (i + 0.5) cell
    const double lo_f = (d.x - half - grid.x_min) / grid.cell - 0.5;
    const double hi_f = (d.x + half - grid.x_min) / grid.cell - 0.5;
    auto lo = static_cast<std::int64_t>(std::floor(lo_f)) + 1;
    auto hi = static_cast<std::int64_t>(std::ceil(hi_f)) - 1;
    lo = std::max<std::int64_t>(lo, 0);
    hi = std::min(hi, last);
    if (lo <= hi) scratch.emplace_back(lo, hi);
  }
  if (scratch.empty()) return 0;
  std::sort(scratch.begin(), scratch.end());
  std::int64_t covered = 0;
  auto [cur_lo, cur_hi] = scratch.front();
  for (std::size_t i = 1; i < scratch.size(); ++i) {
    if (scratch[i].first <= cur_hi + 1) {
      cur_hi = std::max(cur_hi, scratch[i].second);
    } else {
      covered += cur_hi - cur_lo + 1;
      cur_lo = scratch[i].first;
      cur_hi = scratch[i].second;
    }
  }
  covered += cur_hi - cur_lo + 1;
  return covered;
}

}  // namespace

RasterGrid grid_for(std::span<const Disc> discs, std::size_t resolution) {
  if (discs.empty()) throw std::invalid_argument("grid_for: no discs");
  if (resolution < 1) throw std::invalid_argument("grid_for: resolution must be >= 1");
  double x_lo = discs[0].x - discs[0].r, x_hi = discs[0].x + discs[0].r;
  double y_lo = discs[0].y - discs[0].r, y_hi = discs[0].y + discs[0].r;
  for (const Disc& d : discs) {
    x_lo = std::min(x_lo, d.x - d.r);
    x_hi = std::max(x_hi, d.x + d.r);
    y_lo = std::min(y_lo, d.y - d.r);
    y_hi = std::max(y_hi, d.y + d.r);
  }
  const double w = x_hi - x_lo;
  const double h = y_hi - y_lo;
  const double shortest = std::min(w, h);
  if (!(shortest > 0.0)) throw std::invalid_argument("grid_for: degenerate bounding box");
  RasterGrid g;
  g.cell = shortest / static_cast<double>(resolution);
  g.x_min = x_lo;
  g.y_min = y_lo;
  g.nx = static_cast<std::size_t>(std::ceil(w / g.cell));
  g.ny = static_cast<std::size_t>(std::ceil(h / g.cell));
  return g;
}

RasterEstimate raster_union_area(std::span<const Disc> discs, const RasterGrid& grid,
                                 Execution exec) {
  const auto rows = static_cast<std::int64_t>(grid.ny);
  std::int64_t covered = 0;
  if (exec == Execution::serial) {
    std::vector<Span> scratch;
    for (std::int64_t row = 0; row < rows; ++row) {
      covered += count_row(discs, grid, static_cast<std::size_t>(row), scratch);
    }
  } else {
#pragma omp parallel reduction(+ : covered)
    {
      std::vector<Span> scratch;
#pragma omp for schedule(static)
      for (std::int64_t row = 0; row < rows; ++row) {
        covered += count_row(discs, grid, static_cast<std::size_t>(row), scratch);
      }
    }
  }

  RasterEstimate out;
  out.covered_cells = static_cast<std::size_t>(covered);
  out.cell_size = grid.cell;
  out.area = static_cast<double>(covered) * grid.cell * grid.cell;
  const double perimeter = 2.0 * (static_cast<double>(grid.nx) + static_cast<double>(grid.ny)) * grid.cell;
  out.error_band = perimeter * grid.cell;
  return out;
}

RasterEstimate swept_area_oracle(const SweptDiscQuery& q, std::size_t n_discs,
                                 std::size_t grid_resolution, Execution exec) {
  q.validate();
  if (n_discs < 2) throw std::invalid_argument("swept_area_oracle: n_discs must be >= 2");
  std::vector<Disc> discs;
  discs.reserve(n_discs + 1);
  for (std::size_t i = 0; i <= n_discs; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(n_discs);
    discs.push_back({q.z * u, 0.0, chord_distance(q, u) / q.beta});
  }
  return raster_union_area(discs, grid_for(discs, grid_resolution), exec);
}

}  // namespace sojourn::geometry
