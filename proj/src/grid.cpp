#include "fise/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fise/errors.hpp"

namespace fise {

SpatialGrid make_grid(double L, int N) {
  if (!(L > 0.0)) throw config_error("make_grid: L must be positive, got " + std::to_string(L));
  if (N < 4 || N % 2 != 0)
    throw config_error("make_grid: N must be an even integer >= 4, got " + std::to_string(N));

  SpatialGrid g;
  g.L = L;
  g.N = N;
  g.dx = 2.0 * L / static_cast<double>(N);
  g.x_nodes.resize(static_cast<size_t>(N));
  g.k_nodes.resize(static_cast<size_t>(N));

  const double dk = std::numbers::pi / L;  // 2*pi / (2L)
  for (int j = 0; j < N; ++j) {
    g.x_nodes[static_cast<size_t>(j)] = -L + g.dx * static_cast<double>(j);
    const int n = (j <= N / 2) ? j : j - N;
    g.k_nodes[static_cast<size_t>(j)] = dk * static_cast<double>(n);
  }
  return g;
}

std::shared_ptr<const SpatialGrid> make_shared_grid(double L, int N) {
  return std::make_shared<const SpatialGrid>(make_grid(L, N));
}

int SpatialGrid::index_near(double x) const {
  const double j = (x + L) / dx;
  const long idx = std::lround(j);
  return static_cast<int>(std::clamp(idx, 0L, static_cast<long>(N - 1)));
}

}  // namespace fise
