#include "fise/groundstate.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "fise/errors.hpp"

namespace fise {

namespace {

void fix_global_phase(WaveFunction& psi) {
  // Imaginary time keeps a real start real in exact arithmetic; pin the
  // residual global phase so checkpoints and overlaps reproduce.
  const size_t j0 = psi.amplitudes.size() / 2;  // x = 0 node
  const auto c = psi.amplitudes[j0];
  const double mag = std::abs(c);
  if (mag > 0.0) {
    const auto rot = std::conj(c) / mag;
    for (auto& v : psi.amplitudes) v *= rot;
  }
}

}  // namespace

GroundStateResult solve_ground_state_potential(FractionalOrder alpha,
                                               std::vector<double> potential,
                                               std::shared_ptr<const SpatialGrid> grid,
                                               const GroundStateOptions& opts,
                                               const WaveFunction* guess) {
  StepConfig cfg;
  cfg.dt = opts.dtau;
  cfg.mode = StepMode::imaginary_time;
  cfg.apply_mask = false;

  SplitStepPropagator prop(grid, alpha, std::move(potential), FieldSpec{0.0, RampShape::none, 0.0},
                           std::nullopt, cfg);

  WaveFunction psi = guess ? *guess : gaussian_state(grid);
  psi.normalize();
  prop.load(psi);

  const long steps_per_check = std::max(1L, std::lround(opts.check_interval / opts.dtau));
  double e_prev = prop.energy();
  long total_steps = 0;
  double delta = 0.0;

  while (total_steps < opts.max_steps) {
    for (long s = 0; s < steps_per_check; ++s) prop.step_imag();
    total_steps += steps_per_check;
    const double e = prop.energy();
    delta = std::fabs(e - e_prev);
    e_prev = e;
    if (delta < opts.tol_E) {
      GroundStateResult res;
      res.psi0 = prop.state();
      res.psi0.normalize();
      fix_global_phase(res.psi0);
      res.E0 = e;
      res.Ip = -e;
      res.iterations = total_steps;
      res.converged = true;
      return res;
    }
  }
  throw convergence_error("solve_ground_state: energy still moving by " + std::to_string(delta) +
                          " a.u. per check after " + std::to_string(total_steps) + " steps");
}

GroundStateResult solve_ground_state(FractionalOrder alpha, const SoftCoreSpec& potential,
                                     std::shared_ptr<const SpatialGrid> grid,
                                     const GroundStateOptions& opts, const WaveFunction* guess) {
  return solve_ground_state_potential(alpha, sample_potential(*grid, potential), grid, opts,
                                      guess);
}

CalibrationResult calibrate_softcore(FractionalOrder alpha, double Ip_target, double Z,
                                     std::shared_ptr<const SpatialGrid> grid,
                                     const CalibrationOptions& opts) {
  if (!(Ip_target > 0.0)) throw config_error("calibrate_softcore: Ip_target must be positive");
  if (!(Z > 0.0)) throw config_error("calibrate_softcore: Z must be positive");

  WaveFunction warm;  // previous solution, reused as the next initial guess
  bool have_warm = false;
  int solves = 0;
  GroundStateResult last_gs;

  // f(a) = Ip(alpha; a) - Ip_target; each evaluation is a full solve.
  auto f = [&](double a) {
    last_gs = solve_ground_state(alpha, SoftCoreSpec{Z, a}, grid, opts.gs,
                                 have_warm ? &warm : nullptr);
    warm = last_gs.psi0;
    have_warm = true;
    ++solves;
    return last_gs.Ip - Ip_target;
  };

  auto finish = [&](double a_star, double a_lo, double a_hi) {
    CalibrationResult res;
    res.a_star = a_star;
    res.achieved_Ip = last_gs.Ip;
    res.a_lo = a_lo;
    res.a_hi = a_hi;
    res.iterations = solves;
    res.psi0 = last_gs.psi0;
    res.E0 = last_gs.E0;
    return res;
  };

  double a = 1.0;
  double fa = f(a);
  if (std::fabs(fa) <= opts.tol_Ip) return finish(a, 0.5 * a, 2.0 * a);

  // Bracket by geometric expansion. The well shallows as a grows, so Ip(a)
  // must decrease along the walk; a violation means the solve went wrong.
  double a_lo, a_hi, f_lo, f_hi;
  if (fa > 0.0) {
    a_lo = a;
    f_lo = fa;
    a_hi = a;
    f_hi = fa;
    while (f_hi > 0.0) {
      a_lo = a_hi;
      f_lo = f_hi;
      a_hi *= 2.0;
      if (a_hi > opts.a_ceil)
        throw convergence_error("calibrate_softcore: no sign change up to a = " +
                                std::to_string(opts.a_ceil));
      f_hi = f(a_hi);
      if (f_hi > f_lo + 1e-9)
        throw convergence_error("calibrate_softcore: Ip(a) not decreasing near a = " +
                                std::to_string(a_hi));
      if (std::fabs(f_hi) <= opts.tol_Ip) return finish(a_hi, a_lo, 2.0 * a_hi);
    }
  } else {
    a_hi = a;
    f_hi = fa;
    a_lo = a;
    f_lo = fa;
    while (f_lo < 0.0) {
      a_hi = a_lo;
      f_hi = f_lo;
      a_lo *= 0.5;
      if (a_lo < opts.a_floor)
        throw convergence_error("calibrate_softcore: no sign change down to a = " +
                                std::to_string(opts.a_floor));
      f_lo = f(a_lo);
      if (f_lo < f_hi - 1e-9)
        throw convergence_error("calibrate_softcore: Ip(a) not decreasing near a = " +
                                std::to_string(a_lo));
      if (std::fabs(f_lo) <= opts.tol_Ip) return finish(a_lo, 0.5 * a_lo, a_hi);
    }
  }

  // Now f(a_lo) > 0 > f(a_hi) with a_lo < a_hi.
  for (int it = 0; it < opts.max_bisections; ++it) {
    const double mid = 0.5 * (a_lo + a_hi);
    const double f_mid = f(mid);
    if (std::fabs(f_mid) <= opts.tol_Ip) return finish(mid, a_lo, a_hi);
    if (f_mid > 0.0)
      a_lo = mid;
    else
      a_hi = mid;
  }
  throw convergence_error("calibrate_softcore: bisection did not reach tol_Ip = " +
                          std::to_string(opts.tol_Ip) + " within " +
                          std::to_string(opts.max_bisections) + " steps");
}

}  // namespace fise
