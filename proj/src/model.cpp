#include "fise/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fise/errors.hpp"

namespace fise {

FractionalOrder::FractionalOrder(double alpha) : alpha_(alpha) {
  if (!(alpha > 1.0) || !(alpha <= 2.0))
    throw config_error("FractionalOrder: alpha must lie in (1, 2], got " + std::to_string(alpha));
}

RampShape ramp_shape_from_string(const std::string& s) {
  if (s == "none") return RampShape::none;
  if (s == "linear") return RampShape::linear;
  if (s == "sin2") return RampShape::sin2;
  throw config_error("unknown ramp shape '" + s + "' (expected none|linear|sin2)");
}

std::string to_string(RampShape s) {
  switch (s) {
    case RampShape::none: return "none";
    case RampShape::linear: return "linear";
    case RampShape::sin2: return "sin2";
  }
  return "?";
}

double riesz_symbol(double k, FractionalOrder alpha) {
  return 0.5 * std::pow(std::fabs(k), alpha.value());
}

double soft_core(double x, const SoftCoreSpec& spec) {
  return -spec.Z / std::sqrt(x * x + spec.a * spec.a);
}

double ramp_envelope(const FieldSpec& field, double t) {
  if (field.ramp_shape == RampShape::none) return 1.0;
  if (t >= field.T_ramp || field.T_ramp <= 0.0) return 1.0;
  if (t <= 0.0) return 0.0;
  if (field.ramp_shape == RampShape::linear) return t / field.T_ramp;
  const double s = std::sin(0.5 * std::numbers::pi * t / field.T_ramp);
  return s * s;
}

double total_potential(double x, const SoftCoreSpec& spec, const FieldSpec& field, double t) {
  return soft_core(x, spec) + ramp_envelope(field, t) * field.F0 * x;
}

double mask_value(double x, const MaskSpec& spec, double L) {
  if (!(spec.x_cap > 0.0) || !(spec.x_cap < L))
    throw config_error("mask_value: requires 0 < x_cap < L");
  const double ax = std::fabs(x);
  if (ax <= spec.x_cap) return 1.0;
  const double r = (ax - spec.x_cap) / (L - spec.x_cap);
  return std::exp(-spec.eta * std::pow(r, spec.m));
}

double barrier_suppression_field(double Ip, double Z) {
  return Ip * Ip / (4.0 * Z);
}

std::vector<double> sample_potential(const SpatialGrid& grid, const SoftCoreSpec& spec) {
  std::vector<double> v(grid.x_nodes.size());
  for (size_t j = 0; j < v.size(); ++j) v[j] = soft_core(grid.x_nodes[j], spec);
  return v;
}

std::vector<double> sample_mask(const SpatialGrid& grid, const MaskSpec& spec) {
  std::vector<double> m(grid.x_nodes.size());
  for (size_t j = 0; j < m.size(); ++j) m[j] = mask_value(grid.x_nodes[j], spec, grid.L);
  return m;
}

MaskSpec default_mask(double L) { return MaskSpec{0.8 * L, 5.0, 4.0}; }

}  // namespace fise
