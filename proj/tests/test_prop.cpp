#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <random>

#include "fise/errors.hpp"
#include "fise/groundstate.hpp"
#include "fise/prop.hpp"
#include "oracles.hpp"

using namespace fise;

namespace {

SystemSpec soft_core_system(double alpha, double F0, RampShape ramp = RampShape::sin2,
                            double T_ramp = 20.0) {
  return SystemSpec{FractionalOrder(alpha), SoftCoreSpec{1.0, 1.0},
                    FieldSpec{F0, ramp, T_ramp}};
}

}  // namespace

TEST_CASE("kinetic-only evolution preserves the norm to machine precision") {
  auto grid = make_shared_grid(40.0, 512);
  for (double alpha : {1.1, 1.5, 2.0}) {
    SplitStepPropagator prop(grid, FractionalOrder(alpha), std::vector<double>(512, 0.0),
                             FieldSpec{0.0, RampShape::none, 0.0}, std::nullopt,
                             StepConfig{0.01, StepMode::real_time, false});
    prop.load(gaussian_state(grid, 1.5));
    for (int s = 0; s < 100; ++s) prop.step_real(0.01 * s);
    CHECK(std::fabs(prop.norm2() - 1.0) < 1e-13);
  }
}

TEST_CASE("free Gaussian dispersion matches the analytic width law") {
  // quadratic dispersion: sigma(t) = sqrt(1 + t^2), checked pointwise at t = 2
  auto grid = make_shared_grid(40.0, 1024);
  SplitStepPropagator prop(grid, FractionalOrder(2.0), std::vector<double>(1024, 0.0),
                           FieldSpec{0.0, RampShape::none, 0.0}, std::nullopt,
                           StepConfig{0.01, StepMode::real_time, false});
  prop.load(gaussian_state(grid, 1.0));
  const int steps = 200;
  for (int s = 0; s < steps; ++s) prop.step_real(0.01 * s);
  const auto psi = prop.state();
  double max_err = 0.0;
  for (size_t j = 0; j < psi.amplitudes.size(); ++j) {
    const double rho = std::norm(psi.amplitudes[j]);
    max_err = std::max(max_err,
                       std::fabs(rho - oracles::free_gaussian_density(grid->x_nodes[j], 2.0)));
  }
  CHECK(max_err < 1e-6);
}

TEST_CASE("quadratic-order stepping matches an independent split-operator coding") {
  auto grid = make_shared_grid(30.0, 256);
  const auto V = sample_potential(*grid, SoftCoreSpec{1.0, 1.0});
  const FieldSpec field{0.05, RampShape::sin2, 5.0};
  const double dt = 0.01;

  SplitStepPropagator prop(grid, FractionalOrder(2.0), V, field, std::nullopt,
                           StepConfig{dt, StepMode::real_time, false});
  WaveFunction psi = gaussian_state(grid, 1.3, 0.7);
  prop.load(psi);

  oracles::ReferenceStepper ref(*grid, V, field, dt);
  std::vector<std::complex<double>> mirror = psi.amplitudes;

  for (int s = 0; s < 50; ++s) {
    prop.step_real(dt * s);
    ref.step(mirror, dt * s);
  }
  const auto out = prop.state();
  double max_diff = 0.0;
  for (size_t j = 0; j < mirror.size(); ++j)
    max_diff = std::max(max_diff, std::abs(out.amplitudes[j] - mirror[j]));
  CHECK(max_diff < 1e-12);
}

TEST_CASE("real-time norm conservation with the absorber disabled") {
  auto grid = make_shared_grid(60.0, 512);
  SplitStepPropagator prop(grid, soft_core_system(1.5, 0.05), std::nullopt,
                           StepConfig{0.01, StepMode::real_time, false});
  prop.load(gaussian_state(grid));
  for (int s = 0; s < 2000; ++s) prop.step_real(0.01 * s);
  CHECK(std::fabs(prop.norm2() - 1.0) < 1e-11);
}

TEST_CASE("imaginary time: converged state is a fixed point") {
  auto grid = make_shared_grid(40.0, 512);
  const auto gs = solve_ground_state(FractionalOrder(2.0), SoftCoreSpec{1.0, 1.0}, grid);
  REQUIRE(gs.converged);

  WaveFunction next = step_imag(gs.psi0, soft_core_system(2.0, 0.0),
                                StepConfig{0.005, StepMode::imaginary_time, false});
  const double e0 = energy_expectation(gs.psi0, soft_core_system(2.0, 0.0));
  const double e1 = energy_expectation(next, soft_core_system(2.0, 0.0));
  CHECK(std::fabs(e1 - e0) < 1e-12);

  std::complex<double> overlap = 0.0;
  for (size_t j = 0; j < next.amplitudes.size(); ++j)
    overlap += std::conj(gs.psi0.amplitudes[j]) * next.amplitudes[j];
  CHECK(std::abs(overlap) * grid->dx == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("imaginary-time energy decreases monotonically from a fresh guess") {
  auto grid = make_shared_grid(40.0, 512);
  SplitStepPropagator prop(grid, soft_core_system(1.5, 0.0), std::nullopt,
                           StepConfig{0.005, StepMode::imaginary_time, false});
  prop.load(gaussian_state(grid, 2.0));
  double prev = prop.energy();
  for (int s = 0; s < 1500; ++s) {
    prop.step_imag();
    const double e = prop.energy();
    CHECK(e <= prev + 1e-12);
    prev = e;
  }
}

TEST_CASE("harmonic well ground energy is 1/2 at quadratic order") {
  auto grid = make_shared_grid(20.0, 512);
  std::vector<double> V(512);
  for (int j = 0; j < 512; ++j) {
    const double x = grid->x_nodes[static_cast<size_t>(j)];
    V[static_cast<size_t>(j)] = 0.5 * x * x;
  }
  const auto gs = solve_ground_state_potential(FractionalOrder(2.0), V, grid);
  CHECK(gs.converged);
  CHECK(gs.E0 == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("energy of a single spectral mode is the kinetic symbol") {
  auto grid = make_shared_grid(25.0, 256);
  WaveFunction psi;
  psi.grid = grid;
  psi.amplitudes.resize(256);
  const double k0 = grid->k_nodes[5];
  for (int j = 0; j < 256; ++j)
    psi.amplitudes[static_cast<size_t>(j)] =
        std::polar(1.0, k0 * grid->x_nodes[static_cast<size_t>(j)]);
  psi.normalize();
  for (double alpha : {1.2, 1.7, 2.0}) {
    const double e =
        energy_expectation(psi, FractionalOrder(alpha), std::vector<double>(256, 0.0));
    CHECK(e == doctest::Approx(riesz_symbol(k0, FractionalOrder(alpha))).epsilon(1e-12));
  }
}

TEST_CASE("energy matches the dense-matrix Rayleigh quotient") {
  auto grid = make_shared_grid(30.0, 256);
  const auto V = sample_potential(*grid, SoftCoreSpec{1.0, 1.0});
  const auto gs = solve_ground_state(FractionalOrder(1.5), SoftCoreSpec{1.0, 1.0}, grid);
  const double rq =
      oracles::dense_rayleigh_quotient(*grid, FractionalOrder(1.5), V, gs.psi0.amplitudes);
  CHECK(std::fabs(gs.E0 - rq) < 1e-8);
}

TEST_CASE("field-free propagation leaves the bound population constant") {
  auto grid = make_shared_grid(30.0, 512);
  GroundStateOptions opts;
  opts.tol_E = 1e-13;  // quench excited residue below the stationarity tolerance
  const auto gs = solve_ground_state(FractionalOrder(2.0), SoftCoreSpec{1.0, 1.0}, grid, opts);

  PropagationConfig pc;
  // dt matches the relaxation step so the split-operator effective
  // Hamiltonians coincide and the loaded state is stationary
  pc.step = StepConfig{0.005, StepMode::real_time, true};
  pc.mask = default_mask(grid->L);
  pc.T_total = 50.0;
  pc.observer_stride = 100;
  pc.x_c = 10.0;
  const auto res = propagate(gs.psi0, soft_core_system(2.0, 0.0, RampShape::none, 0.0), pc);
  for (double pb : res.trace.Pb)
    CHECK(std::fabs(pb - res.trace.Pb.front()) < 1e-10);
  CHECK(!res.boundary_warning);
}

TEST_CASE("survival probability decays monotonically once the field is on") {
  auto grid = make_shared_grid(60.0, 1024);
  const auto gs = solve_ground_state(FractionalOrder(2.0), SoftCoreSpec{1.0, 1.0}, grid);
  PropagationConfig pc;
  pc.step = StepConfig{0.01, StepMode::real_time, true};
  pc.mask = default_mask(grid->L);
  pc.T_total = 400.0;
  pc.observer_stride = 200;
  pc.x_c = 12.0;
  const auto res = propagate(gs.psi0, soft_core_system(2.0, 0.06), pc);
  for (size_t i = 1; i < res.trace.Pb.size(); ++i)
    if (res.trace.times[i - 1] >= 20.0)  // after the ramp
      CHECK(res.trace.Pb[i] <= res.trace.Pb[i - 1] + 1e-9);
}

TEST_CASE("observer trace is sampled on the configured stride") {
  auto grid = make_shared_grid(30.0, 256);
  const auto psi = gaussian_state(grid);
  PropagationConfig pc;
  pc.step = StepConfig{0.01, StepMode::real_time, false};
  pc.T_total = 10.0;
  pc.observer_stride = 250;
  pc.x_c = 10.0;
  const auto res = propagate(psi, soft_core_system(2.0, 0.0, RampShape::none, 0.0), pc);
  REQUIRE(res.trace.times.size() == 5);  // t = 0, 2.5, 5, 7.5, 10
  CHECK(res.trace.times[1] == doctest::Approx(2.5));
  CHECK(res.trace.times.back() == doctest::Approx(10.0));
  CHECK(res.t_end == doctest::Approx(10.0));
}

TEST_CASE("propagation rejects bad configurations") {
  auto grid = make_shared_grid(30.0, 256);
  const auto psi = gaussian_state(grid);
  PropagationConfig pc;
  pc.step = StepConfig{0.01, StepMode::imaginary_time, false};
  pc.T_total = 100.0;
  pc.x_c = 10.0;
  CHECK_THROWS_AS(propagate(psi, soft_core_system(2.0, 0.05), pc), config_error);

  pc.step.mode = StepMode::real_time;
  pc.T_total = 5.0;  // shorter than the 20 a.u. ramp
  CHECK_THROWS_AS(propagate(psi, soft_core_system(2.0, 0.05), pc), config_error);

  pc.T_total = 100.0;
  pc.observer_stride = 0;
  CHECK_THROWS_AS(propagate(psi, soft_core_system(2.0, 0.05), pc), config_error);

  pc.observer_stride = 10;
  pc.mask = default_mask(grid->L);
  pc.x_c = 28.0;  // outside the mask onset at 24
  CHECK_THROWS_AS(propagate(psi, soft_core_system(2.0, 0.05), pc), config_error);
}

TEST_CASE("non-finite amplitudes raise a numeric error") {
  auto grid = make_shared_grid(30.0, 256);
  WaveFunction psi = gaussian_state(grid);
  psi.amplitudes[10] = {std::nan(""), 0.0};
  CHECK(!psi.finite());
  PropagationConfig pc;
  pc.step = StepConfig{0.01, StepMode::real_time, false};
  pc.T_total = 30.0;
  pc.observer_stride = 10;
  pc.x_c = 10.0;
  CHECK_THROWS_AS(propagate(psi, soft_core_system(2.0, 0.0, RampShape::none, 0.0), pc),
                  numeric_error);
}

TEST_CASE("imaginary-time underflow is reported, not propagated") {
  auto grid = make_shared_grid(20.0, 256);
  std::vector<double> V(256);
  for (int j = 0; j < 256; ++j) {
    const double x = grid->x_nodes[static_cast<size_t>(j)];
    V[static_cast<size_t>(j)] = 0.5 * x * x + 1000.0;  // large positive offset
  }
  SplitStepPropagator prop(grid, FractionalOrder(2.0), V, FieldSpec{0.0, RampShape::none, 0.0},
                           std::nullopt, StepConfig{1.0, StepMode::imaginary_time, false});
  prop.load(gaussian_state(grid));
  CHECK_THROWS_AS(prop.step_imag(), numeric_error);
}

TEST_CASE("boundary contamination triggers the advisory warning") {
  auto grid = make_shared_grid(30.0, 512);
  const auto psi = gaussian_state(grid, 2.0, 27.0);  // parked beyond the mask onset
  PropagationConfig pc;
  pc.step = StepConfig{0.01, StepMode::real_time, true};
  pc.mask = default_mask(grid->L);  // onset at 24
  pc.T_total = 2.0;
  pc.observer_stride = 100;
  pc.x_c = 10.0;
  const auto res = propagate(psi, soft_core_system(2.0, 0.0, RampShape::none, 0.0), pc);
  CHECK(res.boundary_warning);
}

TEST_CASE("checkpoints round-trip bit-exactly") {
  auto grid = make_shared_grid(35.0, 512);
  const auto gs = solve_ground_state(FractionalOrder(1.5), SoftCoreSpec{1.0, 1.0}, grid);
  const std::string path = (std::filesystem::temp_directory_path() / "fise_ckpt_test.wfn").string();

  save_wavefunction(path, gs.psi0, 1.5, 12.25, kCheckpointFlagRealTime);
  CHECK(std::filesystem::file_size(path) == 40 + 512 * 16);  // header + N complex pairs

  const auto loaded = load_wavefunction(path);
  CHECK(loaded.alpha == 1.5);
  CHECK(loaded.time == 12.25);
  CHECK(loaded.flags == kCheckpointFlagRealTime);
  CHECK(loaded.psi.grid->N == 512);
  CHECK(loaded.psi.grid->L == 35.0);
  REQUIRE(loaded.psi.amplitudes.size() == gs.psi0.amplitudes.size());
  for (size_t j = 0; j < gs.psi0.amplitudes.size(); ++j)
    CHECK(loaded.psi.amplitudes[j] == gs.psi0.amplitudes[j]);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_wavefunction("/nonexistent/nope.wfn"), config_error);
}
