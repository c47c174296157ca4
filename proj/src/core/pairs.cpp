#include "pairs.hpp"

#include <algorithm>

namespace stpp::detail {

std::size_t first_exceeding(std::span<const double> grid, double x) {
  return static_cast<std::size_t>(std::upper_bound(grid.begin(), grid.end(), x) - grid.begin());
}

SpatialPairs collect_pairs(std::span<const Point> points, const Window& window,
                           double max_distance) {
  SpatialPairs out;
  const std::size_t n = points.size();
  if (n < 2 || !(max_distance > 0.0)) return out;

  const BoundingBox& box = window.bounds();
  // Cap the cell count so tiny radii do not allocate huge grids; cells only
  // ever get larger than max_distance, which keeps the 3x3 scan complete.
  const double cap = std::max(4.0, std::ceil(2.0 * std::sqrt(static_cast<double>(n))));
  const double cell = std::max({max_distance, box.width() / cap, box.height() / cap});
  const auto nx = static_cast<std::size_t>(std::max(1.0, std::ceil(box.width() / cell)));
  const auto ny = static_cast<std::size_t>(std::max(1.0, std::ceil(box.height() / cell)));

  auto cell_of = [&](Point p) {
    const auto cx = std::min(nx - 1, static_cast<std::size_t>(std::max(0.0, (p.x - box.x_min) / cell)));
    const auto cy = std::min(ny - 1, static_cast<std::size_t>(std::max(0.0, (p.y - box.y_min) / cell)));
    return std::pair{cx, cy};
  };

  // Counting sort of point indices by cell; indices stay ascending per cell.
  std::vector<std::size_t> start(nx * ny + 1, 0);
  std::vector<std::size_t> cell_index(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto [cx, cy] = cell_of(points[k]);
    cell_index[k] = cy * nx + cx;
    ++start[cell_index[k] + 1];
  }
  for (std::size_t c = 0; c < nx * ny; ++c) start[c + 1] += start[c];
  std::vector<std::uint32_t> members(n);
  {
    std::vector<std::size_t> fill(start.begin(), start.end() - 1);
    for (std::size_t k = 0; k < n; ++k) members[fill[cell_index[k]]++] = static_cast<std::uint32_t>(k);
  }

  std::vector<std::uint32_t> neighbours;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [cx, cy] = cell_of(points[i]);
    neighbours.clear();
    for (std::size_t y = cy == 0 ? 0 : cy - 1; y <= std::min(ny - 1, cy + 1); ++y) {
      for (std::size_t x = cx == 0 ? 0 : cx - 1; x <= std::min(nx - 1, cx + 1); ++x) {
        const std::size_t c = y * nx + x;
        for (std::size_t m = start[c]; m < start[c + 1]; ++m) {
          if (members[m] != i) neighbours.push_back(members[m]);
        }
      }
    }
    std::sort(neighbours.begin(), neighbours.end());
    for (std::uint32_t j : neighbours) {
      const double d = distance(points[i], points[j]);
      if (!(d < max_distance)) continue;
      const EdgeWeight w = spatial_edge_weight(points[i], d, window);
      if (w.clamped) ++out.clamped;
      out.pairs.push_back({static_cast<std::uint32_t>(i), j, d, w.weight});
    }
  }
  return out;
}

}  // namespace stpp::detail
