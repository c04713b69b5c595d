#ifndef FISE_MODEL_HPP
#define FISE_MODEL_HPP

#include <string>
#include <vector>

#include "fise/grid.hpp"

namespace fise {

/// Order of the Riesz fractional Laplacian, restricted to (1, 2].
/// The kinetic prefactor is fixed to 1/2 for every order, so the dispersion
/// is T(k) = |k|^alpha / 2 and alpha = 2 is the ordinary Schroedinger limit.
class FractionalOrder {
 public:
  explicit FractionalOrder(double alpha);
  double value() const { return alpha_; }

 private:
  double alpha_;
};

/// Soft-core Coulomb well V(x) = -Z / sqrt(x^2 + a^2).
struct SoftCoreSpec {
  double Z = 1.0;  ///< effective charge (a.u.), > 0
  double a = 1.0;  ///< softening length (bohr), > 0
};

enum class RampShape { none, linear, sin2 };

RampShape ramp_shape_from_string(const std::string& s);
std::string to_string(RampShape s);

/// Static field of peak strength F0, switched on through a ramp envelope g(t):
/// g grows from 0 to 1 on [0, T_ramp] and stays 1 afterwards (g == 1 for
/// shape none). The length-gauge coupling is g(t) * F0 * x.
struct FieldSpec {
  double F0 = 0.0;
  RampShape ramp_shape = RampShape::sin2;
  double T_ramp = 20.0;
};

/// Absorbing mask near the box edges:
///   M(x) = 1                                             for |x| <= x_cap,
///   M(x) = exp[-eta ((|x|-x_cap)/(L-x_cap))^m]           otherwise.
struct MaskSpec {
  double x_cap = 0.0;  ///< absorber onset (bohr), 0 < x_cap < L
  double eta = 5.0;    ///< strength
  double m = 4.0;      ///< exponent, >= 2
};

/// Everything that defines the Hamiltonian of one run.
struct SystemSpec {
  FractionalOrder alpha;
  SoftCoreSpec potential;
  FieldSpec field;
};

/// Kinetic symbol |k|^alpha / 2 (a.u.). Even in k, zero at k = 0.
double riesz_symbol(double k, FractionalOrder alpha);

double soft_core(double x, const SoftCoreSpec& spec);

/// Ramp envelope g(t) in [0, 1].
double ramp_envelope(const FieldSpec& field, double t);

/// V(x) + g(t) * F0 * x.
double total_potential(double x, const SoftCoreSpec& spec, const FieldSpec& field, double t);

/// Mask factor in (0, 1]; throws config_error when x_cap >= L.
double mask_value(double x, const MaskSpec& spec, double L);

/// Nominal tunneling / over-the-barrier boundary F_BSI = Ip^2 / (4 Z).
double barrier_suppression_field(double Ip, double Z);

/// Soft-core values on every grid node.
std::vector<double> sample_potential(const SpatialGrid& grid, const SoftCoreSpec& spec);

/// Mask values on every grid node.
std::vector<double> sample_mask(const SpatialGrid& grid, const MaskSpec& spec);

/// Mask with the default geometry x_cap = 0.8 L, eta = 5, m = 4.
MaskSpec default_mask(double L);

}  // namespace fise

#endif
