#ifndef FISE_GROUNDSTATE_HPP
#define FISE_GROUNDSTATE_HPP

#include <memory>
#include <vector>

#include "fise/prop.hpp"

namespace fise {

struct GroundStateOptions {
  double dtau = 0.005;          ///< imaginary time step (a.u.)
  double tol_E = 1e-10;         ///< energy-stability criterion (a.u.)
  double check_interval = 1.0;  ///< imaginary time between energy checks (a.u.)
  long max_steps = 2000000;     ///< hard iteration guard
};

struct GroundStateResult {
  WaveFunction psi0;     ///< unit norm, phase fixed so psi0(0) is real positive
  double E0 = 0.0;
  double Ip = 0.0;       ///< -E0
  long iterations = 0;   ///< imaginary-time steps taken
  bool converged = false;
};

/// Field-free ground state by imaginary-time split-step propagation, starting
/// from `guess` (or a unit Gaussian when null) and stopping once the energy
/// moves by less than tol_E over one check interval. Throws convergence_error
/// when the step guard is hit first.
GroundStateResult solve_ground_state(FractionalOrder alpha, const SoftCoreSpec& potential,
                                     std::shared_ptr<const SpatialGrid> grid,
                                     const GroundStateOptions& opts = {},
                                     const WaveFunction* guess = nullptr);

/// Same solver for an arbitrary sampled potential.
GroundStateResult solve_ground_state_potential(FractionalOrder alpha,
                                               std::vector<double> potential,
                                               std::shared_ptr<const SpatialGrid> grid,
                                               const GroundStateOptions& opts = {},
                                               const WaveFunction* guess = nullptr);

struct CalibrationOptions {
  double tol_Ip = 1e-4;   ///< |achieved_Ip - Ip_target| tolerance (a.u.)
  double a_floor = 1e-3;  ///< search range for the softening parameter
  double a_ceil = 1e3;
  int max_bisections = 80;
  GroundStateOptions gs{};
};

struct CalibrationResult {
  double a_star = 0.0;
  double achieved_Ip = 0.0;
  double a_lo = 0.0;  ///< final bracket
  double a_hi = 0.0;
  int iterations = 0;  ///< bisection steps (each one a full ground-state solve)
  WaveFunction psi0;   ///< ground state at a_star
  double E0 = 0.0;
};

/// Tunes the soft-core softening parameter a at fixed Z so the measured
/// ionization potential matches Ip_target. Brackets by geometric expansion
/// from a = 1 (the well shallows as a grows, so Ip(a) must decrease; violations
/// are reported), then bisects. Throws convergence_error when no sign change
/// exists inside [a_floor, a_ceil].
CalibrationResult calibrate_softcore(FractionalOrder alpha, double Ip_target, double Z,
                                     std::shared_ptr<const SpatialGrid> grid,
                                     const CalibrationOptions& opts = {});

}  // namespace fise

#endif
