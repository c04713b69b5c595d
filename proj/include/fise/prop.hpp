#ifndef FISE_PROP_HPP
#define FISE_PROP_HPP

#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fise/fft.hpp"
#include "fise/grid.hpp"
#include "fise/model.hpp"
#include "fise/rates.hpp"

namespace fise {

struct WaveFunction {
  std::shared_ptr<const SpatialGrid> grid;
  std::vector<std::complex<double>> amplitudes;

  double norm2() const;  ///< sum |psi|^2 dx
  void normalize();      ///< scale to norm2 == 1
  bool finite() const;
};

/// Normalized Gaussian exp(-(x-x0)^2 / (2 sigma^2)), the stock localized guess.
WaveFunction gaussian_state(std::shared_ptr<const SpatialGrid> grid, double sigma = 1.0,
                            double x0 = 0.0);

enum class StepMode { real_time, imaginary_time };

struct StepConfig {
  double dt = 0.01;
  StepMode mode = StepMode::real_time;
  bool apply_mask = true;  ///< ignored in imaginary time
};

/// Second-order split-operator stepper for the fractional Schroedinger
/// equation with a static (ramped) field in the length gauge.
///
/// Real time: psi <- e^{-i V_E dt/2} F^{-1} e^{-i T(k) dt} F e^{-i V_E dt/2} psi
/// with V_E = V(x) + g(t_mid) F0 x evaluated at the step midpoint, then the
/// absorbing mask if enabled. Imaginary time: the same splitting with
/// e^{-V dt/2}, e^{-T dt} (field off) and renormalization after every step.
class SplitStepPropagator {
 public:
  SplitStepPropagator(std::shared_ptr<const SpatialGrid> grid, FractionalOrder alpha,
                      std::vector<double> static_potential, FieldSpec field,
                      std::optional<MaskSpec> mask, StepConfig cfg);

  /// Convenience: soft-core system.
  SplitStepPropagator(std::shared_ptr<const SpatialGrid> grid, const SystemSpec& system,
                      std::optional<MaskSpec> mask, StepConfig cfg);

  void load(const WaveFunction& psi);
  WaveFunction state() const;

  /// One real-time step from time t to t + dt.
  void step_real(double t);

  /// One imaginary-time step plus renormalization. Throws numeric_error if the
  /// norm collapses below 1e-300 before renormalization (dtau too large).
  void step_imag();

  double norm2() const;
  double bound_probability(double x_c) const;  ///< sum_{|x|<=x_c} |psi|^2 dx
  double energy() const;  ///< field-free <T> + <V> over norm2 (spectral <T>)
  bool finite() const;

  const SpatialGrid& grid() const { return *grid_; }
  FractionalOrder alpha() const { return alpha_; }

 private:
  void rebuild_static_real_factors();

  std::shared_ptr<const SpatialGrid> grid_;
  FractionalOrder alpha_;
  std::vector<double> potential_;  // V(x_j), field excluded
  FieldSpec field_;
  std::optional<MaskSpec> mask_spec_;
  StepConfig cfg_;

  SpectralWorkspace ws_;
  std::vector<double> kinetic_;             // T(k_n)
  std::vector<std::complex<double>> kin_phase_;  // e^{-i T dt} / N (real time)
  std::vector<double> kin_damp_;                 // e^{-T dtau} / N (imaginary time)
  std::vector<double> mask_;                     // node mask values (may be empty)
  std::vector<std::complex<double>> pot_half_;   // e^{-i V_E dt/2} at g = 1
  std::vector<std::complex<double>> pot_half_masked_;
  std::vector<double> pot_half_imag_;            // e^{-V dtau / 2}
  std::vector<std::complex<double>> ramp_scratch_;  // per-step factors while the ramp is active
};

// Single-step functional forms over the soft-core system.
WaveFunction step_real(const WaveFunction& psi, double t, const SystemSpec& system,
                       const StepConfig& cfg, const std::optional<MaskSpec>& mask = std::nullopt);
WaveFunction step_imag(const WaveFunction& psi, const SystemSpec& system, const StepConfig& cfg);

/// Field-free energy <T(k)> + <V(x)> with <T> evaluated spectrally under the
/// unitary transform convention. The state is assumed normalized; the value is
/// divided by norm2 so it equals the Rayleigh quotient either way.
double energy_expectation(const WaveFunction& psi, const SystemSpec& system);
double energy_expectation(const WaveFunction& psi, FractionalOrder alpha,
                          std::span<const double> potential);

struct PropagationConfig {
  StepConfig step;  // mode must be real_time
  std::optional<MaskSpec> mask;
  double T_total = 2000.0;
  int observer_stride = 200;  ///< P_b sampled every this many steps
  double x_c = 10.0;          ///< bound-region half-width for P_b
  double stop_Pb_floor = 0.0; ///< early stop when P_b drops below (0 = off)
  double boundary_warn_fraction = 0.2;
};

struct PropagationResult {
  DecayTrace trace;
  WaveFunction final_state;
  bool boundary_warning = false;  ///< probability beyond the mask onset exceeded the threshold
  double t_end = 0.0;             ///< last propagated time (< T_total if stopped early)
};

/// Repeated step_real with P_b sampling. Deterministic for a fixed config.
/// Requires T_total > T_ramp and observer_stride >= 1.
PropagationResult propagate(const WaveFunction& psi0, const SystemSpec& system,
                            const PropagationConfig& cfg);

// Wavefunction checkpoints. Little-endian binary layout:
//   u64 N | f64 L | f64 alpha | f64 time | u64 flags | N * (f64 re, f64 im)
// flags bit 0: state produced by real-time propagation.
inline constexpr std::uint64_t kCheckpointFlagRealTime = 1ull;

void save_wavefunction(const std::string& path, const WaveFunction& psi, double alpha, double time,
                       std::uint64_t flags);

struct LoadedWaveFunction {
  WaveFunction psi;
  double alpha = 0.0;
  double time = 0.0;
  std::uint64_t flags = 0;
};

LoadedWaveFunction load_wavefunction(const std::string& path);

}  // namespace fise

#endif
