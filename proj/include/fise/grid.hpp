#ifndef FISE_GRID_HPP
#define FISE_GRID_HPP

#include <memory>
#include <vector>

namespace fise {

/// Uniform position grid on [-L, L) together with its wavenumber companion.
///
/// Nodes are x_j = -L + j*dx with dx = 2L/N.  The wavenumbers follow the
/// usual FFT layout with dk = 2*pi/(2L):
///   k_n = dk * n        for 0 <= n <= N/2,
///   k_n = dk * (n - N)  for N/2 < n < N,
/// so k_0 = 0 and the single positive Nyquist mode sits at index N/2.
struct SpatialGrid {
  double L = 0.0;   ///< half-width of the box (bohr)
  int N = 0;        ///< number of nodes (even)
  double dx = 0.0;  ///< node spacing 2L/N (bohr)
  std::vector<double> x_nodes;
  std::vector<double> k_nodes;  ///< FFT-ordered (1/bohr)

  double max_abs_k() const { return k_nodes.empty() ? 0.0 : k_nodes[static_cast<size_t>(N) / 2]; }

  /// Index of the node closest to x (clamped to the grid).
  int index_near(double x) const;
};

/// Builds the grid. Requires L > 0 and even N >= 4; throws config_error otherwise.
SpatialGrid make_grid(double L, int N);

/// Same grid behind a shared handle, for structures that reference it.
std::shared_ptr<const SpatialGrid> make_shared_grid(double L, int N);

}  // namespace fise

#endif
