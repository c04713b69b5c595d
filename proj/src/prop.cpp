#include "fise/prop.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "fise/errors.hpp"

namespace fise {

static_assert(std::endian::native == std::endian::little,
              "checkpoint layout is little-endian; big-endian hosts are unsupported");

double WaveFunction::norm2() const {
  double acc = 0.0;
  for (const auto& c : amplitudes) acc += std::norm(c);
  return acc * grid->dx;
}

void WaveFunction::normalize() {
  const double n2 = norm2();
  if (n2 <= 0.0 || !std::isfinite(n2))
    throw numeric_error("WaveFunction::normalize: norm collapsed or non-finite");
  const double s = 1.0 / std::sqrt(n2);
  for (auto& c : amplitudes) c *= s;
}

bool WaveFunction::finite() const {
  for (const auto& c : amplitudes)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  return true;
}

WaveFunction gaussian_state(std::shared_ptr<const SpatialGrid> grid, double sigma, double x0) {
  WaveFunction psi;
  psi.grid = grid;
  psi.amplitudes.resize(grid->x_nodes.size());
  for (size_t j = 0; j < psi.amplitudes.size(); ++j) {
    const double u = (grid->x_nodes[j] - x0) / sigma;
    psi.amplitudes[j] = std::exp(-0.5 * u * u);
  }
  psi.normalize();
  return psi;
}

SplitStepPropagator::SplitStepPropagator(std::shared_ptr<const SpatialGrid> grid,
                                         FractionalOrder alpha,
                                         std::vector<double> static_potential, FieldSpec field,
                                         std::optional<MaskSpec> mask, StepConfig cfg)
    : grid_(std::move(grid)),
      alpha_(alpha),
      potential_(std::move(static_potential)),
      field_(field),
      mask_spec_(mask),
      cfg_(cfg),
      ws_(grid_->N) {
  if (potential_.size() != static_cast<size_t>(grid_->N))
    throw config_error("SplitStepPropagator: potential sample count does not match the grid");
  if (!(cfg_.dt > 0.0)) throw config_error("SplitStepPropagator: dt must be positive");

  const size_t n = static_cast<size_t>(grid_->N);
  const double inv_n = 1.0 / static_cast<double>(grid_->N);

  kinetic_.resize(n);
  for (size_t j = 0; j < n; ++j) kinetic_[j] = riesz_symbol(grid_->k_nodes[j], alpha_);

  if (cfg_.mode == StepMode::real_time) {
    kin_phase_.resize(n);
    for (size_t j = 0; j < n; ++j) kin_phase_[j] = std::polar(inv_n, -kinetic_[j] * cfg_.dt);
    if (cfg_.apply_mask && mask_spec_) mask_ = sample_mask(*grid_, *mask_spec_);
    rebuild_static_real_factors();
  } else {
    kin_damp_.resize(n);
    for (size_t j = 0; j < n; ++j) kin_damp_[j] = std::exp(-kinetic_[j] * cfg_.dt) * inv_n;
    pot_half_imag_.resize(n);
    for (size_t j = 0; j < n; ++j) pot_half_imag_[j] = std::exp(-0.5 * potential_[j] * cfg_.dt);
  }
}

SplitStepPropagator::SplitStepPropagator(std::shared_ptr<const SpatialGrid> grid,
                                         const SystemSpec& system, std::optional<MaskSpec> mask,
                                         StepConfig cfg)
    : SplitStepPropagator(grid, system.alpha, sample_potential(*grid, system.potential),
                          system.field, mask, cfg) {}

void SplitStepPropagator::rebuild_static_real_factors() {
  // Half-step phase for the fully switched-on field (g = 1).
  const size_t n = potential_.size();
  pot_half_.resize(n);
  for (size_t j = 0; j < n; ++j) {
    const double v = potential_[j] + field_.F0 * grid_->x_nodes[j];
    pot_half_[j] = std::polar(1.0, -0.5 * v * cfg_.dt);
  }
  if (!mask_.empty()) {
    pot_half_masked_.resize(n);
    for (size_t j = 0; j < n; ++j) pot_half_masked_[j] = pot_half_[j] * mask_[j];
  }
}

void SplitStepPropagator::load(const WaveFunction& psi) {
  if (!psi.grid || psi.grid->N != grid_->N || psi.grid->L != grid_->L)
    throw config_error("SplitStepPropagator::load: state grid does not match");
  std::memcpy(ws_.data(), psi.amplitudes.data(), psi.amplitudes.size() * sizeof(std::complex<double>));
}

WaveFunction SplitStepPropagator::state() const {
  WaveFunction psi;
  psi.grid = grid_;
  psi.amplitudes.assign(ws_.data(), ws_.data() + grid_->N);
  return psi;
}

void SplitStepPropagator::step_real(double t) {
  if (cfg_.mode != StepMode::real_time)
    throw config_error("step_real called on an imaginary-time propagator");
  const size_t n = potential_.size();
  auto* psi = ws_.data();
  const double t_mid = t + 0.5 * cfg_.dt;
  const double g = ramp_envelope(field_, t_mid);

  if (g >= 1.0) {
    for (size_t j = 0; j < n; ++j) psi[j] *= pot_half_[j];
    ws_.forward();
    for (size_t j = 0; j < n; ++j) psi[j] *= kin_phase_[j];
    ws_.backward();
    if (!mask_.empty()) {
      for (size_t j = 0; j < n; ++j) psi[j] *= pot_half_masked_[j];
    } else {
      for (size_t j = 0; j < n; ++j) psi[j] *= pot_half_[j];
    }
    return;
  }

  // During the ramp the potential phase depends on t; both half steps use the
  // midpoint envelope, which keeps the scheme second order.
  if (ramp_scratch_.size() != n) ramp_scratch_.resize(n);
  for (size_t j = 0; j < n; ++j) {
    const double v = potential_[j] + g * field_.F0 * grid_->x_nodes[j];
    ramp_scratch_[j] = std::polar(1.0, -0.5 * v * cfg_.dt);
  }
  for (size_t j = 0; j < n; ++j) psi[j] *= ramp_scratch_[j];
  ws_.forward();
  for (size_t j = 0; j < n; ++j) psi[j] *= kin_phase_[j];
  ws_.backward();
  for (size_t j = 0; j < n; ++j) psi[j] *= ramp_scratch_[j];
  if (!mask_.empty())
    for (size_t j = 0; j < n; ++j) psi[j] *= mask_[j];
}

void SplitStepPropagator::step_imag() {
  if (cfg_.mode != StepMode::imaginary_time)
    throw config_error("step_imag called on a real-time propagator");
  const size_t n = potential_.size();
  auto* psi = ws_.data();
  for (size_t j = 0; j < n; ++j) psi[j] *= pot_half_imag_[j];
  ws_.forward();
  for (size_t j = 0; j < n; ++j) psi[j] *= kin_damp_[j];
  ws_.backward();
  for (size_t j = 0; j < n; ++j) psi[j] *= pot_half_imag_[j];

  double acc = 0.0;
  for (size_t j = 0; j < n; ++j) acc += std::norm(psi[j]);
  const double n2 = acc * grid_->dx;
  if (n2 <= 1e-300)
    throw numeric_error("step_imag: norm underflow before renormalization (reduce dtau)");
  if (!std::isfinite(n2)) throw numeric_error("step_imag: non-finite norm");
  const double s = 1.0 / std::sqrt(n2);
  for (size_t j = 0; j < n; ++j) psi[j] *= s;
}

double SplitStepPropagator::norm2() const {
  double acc = 0.0;
  const auto* psi = ws_.data();
  for (int j = 0; j < grid_->N; ++j) acc += std::norm(psi[j]);
  return acc * grid_->dx;
}

double SplitStepPropagator::bound_probability(double x_c) const {
  double acc = 0.0;
  const auto* psi = ws_.data();
  for (int j = 0; j < grid_->N; ++j)
    if (std::fabs(grid_->x_nodes[static_cast<size_t>(j)]) <= x_c) acc += std::norm(psi[j]);
  return acc * grid_->dx;
}

double SplitStepPropagator::energy() const {
  WaveFunction psi = state();
  return energy_expectation(psi, alpha_, potential_);
}

bool SplitStepPropagator::finite() const {
  const auto* psi = ws_.data();
  for (int j = 0; j < grid_->N; ++j)
    if (!std::isfinite(psi[j].real()) || !std::isfinite(psi[j].imag())) return false;
  return true;
}

WaveFunction step_real(const WaveFunction& psi, double t, const SystemSpec& system,
                       const StepConfig& cfg, const std::optional<MaskSpec>& mask) {
  SplitStepPropagator prop(psi.grid, system, mask, cfg);
  prop.load(psi);
  prop.step_real(t);
  WaveFunction out = prop.state();
  if (!out.finite()) throw numeric_error("step_real: non-finite amplitudes");
  return out;
}

WaveFunction step_imag(const WaveFunction& psi, const SystemSpec& system, const StepConfig& cfg) {
  SystemSpec field_free = system;
  field_free.field.F0 = 0.0;  // imaginary time always runs field-free
  StepConfig c = cfg;
  c.apply_mask = false;
  SplitStepPropagator prop(psi.grid, field_free, std::nullopt, c);
  prop.load(psi);
  prop.step_imag();
  return prop.state();
}

double energy_expectation(const WaveFunction& psi, FractionalOrder alpha,
                          std::span<const double> potential) {
  const auto& grid = *psi.grid;
  if (potential.size() != static_cast<size_t>(grid.N))
    throw config_error("energy_expectation: potential sample count does not match the grid");
  const auto spectral = unitary_fft(psi.amplitudes);
  double t_acc = 0.0;
  for (size_t j = 0; j < spectral.size(); ++j)
    t_acc += riesz_symbol(grid.k_nodes[j], alpha) * std::norm(spectral[j]);
  double v_acc = 0.0;
  for (size_t j = 0; j < potential.size(); ++j) v_acc += potential[j] * std::norm(psi.amplitudes[j]);
  const double n2 = psi.norm2();
  if (n2 <= 0.0 || !std::isfinite(n2))
    throw numeric_error("energy_expectation: bad norm");
  return (t_acc + v_acc) * grid.dx / n2;
}

double energy_expectation(const WaveFunction& psi, const SystemSpec& system) {
  return energy_expectation(psi, system.alpha, sample_potential(*psi.grid, system.potential));
}

PropagationResult propagate(const WaveFunction& psi0, const SystemSpec& system,
                            const PropagationConfig& cfg) {
  if (cfg.step.mode != StepMode::real_time)
    throw config_error("propagate: step mode must be real_time");
  if (cfg.observer_stride < 1) throw config_error("propagate: observer_stride must be >= 1");
  if (!(cfg.T_total > system.field.T_ramp) && system.field.ramp_shape != RampShape::none)
    throw config_error("propagate: T_total must exceed the field ramp");
  if (cfg.mask && !(cfg.x_c < cfg.mask->x_cap))
    throw config_error("propagate: x_c must lie inside the mask onset");

  SplitStepPropagator prop(psi0.grid, system, cfg.mask, cfg.step);
  prop.load(psi0);

  const double dt = cfg.step.dt;
  const long n_steps = std::max(1L, std::lround(cfg.T_total / dt));

  PropagationResult result;
  result.trace.x_c = cfg.x_c;
  result.trace.times.push_back(0.0);
  result.trace.Pb.push_back(prop.bound_probability(cfg.x_c));

  bool warned = false;
  if (cfg.mask) {
    const double outside0 = prop.norm2() - prop.bound_probability(cfg.mask->x_cap);
    if (outside0 > cfg.boundary_warn_fraction) warned = true;
  }
  long s = 0;
  for (s = 1; s <= n_steps; ++s) {
    prop.step_real(static_cast<double>(s - 1) * dt);
    if (s % cfg.observer_stride == 0 || s == n_steps) {
      const double t = static_cast<double>(s) * dt;
      const double pb = prop.bound_probability(cfg.x_c);
      const double n2 = prop.norm2();
      if (!std::isfinite(pb) || !std::isfinite(n2))
        throw numeric_error("propagate: non-finite amplitudes at t = " + std::to_string(t));
      result.trace.times.push_back(t);
      result.trace.Pb.push_back(pb);
      if (cfg.mask) {
        // Advisory check that the box is large enough: probability parked
        // beyond the absorber onset should stay small.
        const double outside = n2 - prop.bound_probability(cfg.mask->x_cap);
        if (outside > cfg.boundary_warn_fraction) warned = true;
      }
      if (cfg.stop_Pb_floor > 0.0 && pb < cfg.stop_Pb_floor && t > system.field.T_ramp) break;
    }
  }

  result.final_state = prop.state();
  result.boundary_warning = warned;
  result.t_end = static_cast<double>(std::min(s, n_steps)) * dt;
  return result;
}

namespace {

template <typename T>
void write_pod(std::ofstream& os, const T& value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& is, T& value) {
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
}

}  // namespace

void save_wavefunction(const std::string& path, const WaveFunction& psi, double alpha, double time,
                       std::uint64_t flags) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw config_error("save_wavefunction: cannot open '" + path + "'");
  write_pod(os, static_cast<std::uint64_t>(psi.grid->N));
  write_pod(os, psi.grid->L);
  write_pod(os, alpha);
  write_pod(os, time);
  write_pod(os, flags);
  os.write(reinterpret_cast<const char*>(psi.amplitudes.data()),
           static_cast<std::streamsize>(psi.amplitudes.size() * sizeof(std::complex<double>)));
  if (!os) throw numeric_error("save_wavefunction: write failed for '" + path + "'");
}

LoadedWaveFunction load_wavefunction(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw config_error("load_wavefunction: cannot open '" + path + "'");
  std::uint64_t n = 0;
  double L = 0.0;
  LoadedWaveFunction out;
  read_pod(is, n);
  read_pod(is, L);
  read_pod(is, out.alpha);
  read_pod(is, out.time);
  read_pod(is, out.flags);
  if (!is || n == 0 || n > (1ull << 30))
    throw config_error("load_wavefunction: corrupt header in '" + path + "'");
  out.psi.grid = make_shared_grid(L, static_cast<int>(n));
  out.psi.amplitudes.resize(n);
  is.read(reinterpret_cast<char*>(out.psi.amplitudes.data()),
          static_cast<std::streamsize>(n * sizeof(std::complex<double>)));
  if (!is) throw config_error("load_wavefunction: truncated data in '" + path + "'");
  return out;
}

}  // namespace fise
