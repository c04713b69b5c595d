#ifndef FISE_RUN_HPP
#define FISE_RUN_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fise/groundstate.hpp"
#include "fise/prop.hpp"
#include "fise/rates.hpp"

namespace fise {

// ---------------------------------------------------------------------------
// Run configuration (one JSON document; every field has a documented default).
// ---------------------------------------------------------------------------

struct GridConfig {
  double L = 100.0;
  int N = 2048;
  bool require_pow2 = true;  ///< reject N that is not a power of two
};

struct SystemConfig {
  std::vector<double> alphas{2.0};
  double Z = 1.0;
  double a = 1.0;          ///< soft-core parameter (fixed-potential protocol)
  double Ip_target = 0.0;  ///< > 0 enables / is required by the fixed-Ip protocol
};

struct FieldSweepConfig {
  std::vector<double> F0_list{0.05};
  std::string ramp_shape = "sin2";
  double T_ramp = 20.0;
  double F_ref = 0.05;  ///< reference field for normalized model curves
};

struct PropagationRunConfig {
  double dt = 0.01;
  double T_total = 0.0;  ///< 0 = adaptive budget from the model rate estimate
  double T_total_min = 2000.0;
  double T_total_cap = 200000.0;  ///< desk-scale ceiling for the adaptive budget
  int observer_stride = 200;
  double stop_Pb_floor = 0.0;  ///< early stop once P_b falls below (0 = off)
};

struct MaskRunConfig {
  double x_cap_frac = 0.8;  ///< absorber onset as a fraction of L
  double eta = 5.0;
  double m = 4.0;
};

struct RatesRunConfig {
  double x_c = 0.0;        ///< explicit bound-region half-width; 0 = automatic
  double x_c_factor = 4.0; ///< automatic: this many 1/e half-widths of |psi0|^2
  double plateau_tolerance = 0.10;
  double min_window = 50.0;
  double rate_floor = 1e-12;
};

struct ImagTimeRunConfig {
  double dtau = 0.005;
  double tol_E = 1e-10;
  long max_steps = 2000000;
  double tol_Ip = 1e-4;  ///< calibration tolerance on the ionization potential
};

struct RunConfig {
  GridConfig grid;
  SystemConfig system;
  FieldSweepConfig field;
  PropagationRunConfig propagation;
  MaskRunConfig mask;
  RatesRunConfig rates;
  ImagTimeRunConfig imag;
  std::string protocol = "A";  ///< "A" fixed potential, "B" fixed Ip
  bool allow_over_bsi = false; ///< permit F0 at/above the barrier-suppression field
  int workers = 0;             ///< 0 = one worker per (alpha, F0) pair
  std::string out_dir = "out";
};

/// Applies the keys present in j on top of the defaults; unknown keys throw.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& cfg);
RunConfig load_config_file(const std::string& path);

/// Hash of the physics content of the config (out_dir and workers excluded,
/// since they cannot change any number).
std::string run_config_hash(const RunConfig& cfg);

/// Validates ranges and cross-field constraints; throws config_error.
void validate_config(const RunConfig& cfg);

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

/// Ground-state preparation for one alpha (solve, or calibrate + solve).
struct AlphaPrep {
  double alpha = 0.0;
  double a_used = 0.0;
  double Ip = 0.0;
  double E0 = 0.0;
  long iterations = 0;       ///< imaginary-time steps of the final solve
  int calibration_solves = 0;  ///< 0 for the fixed-potential protocol
  WaveFunction psi0;
};

struct PointRecord {
  double alpha = 0.0;
  double F0 = 0.0;
  bool ok = false;
  std::string error;  ///< set when !ok
  double gamma = 0.0, t1 = 0.0, t2 = 0.0, r_squared = 0.0, P0 = 0.0;
  bool below_floor = false;
  bool boundary_warning = false;
  bool over_bsi = false;
  double Ip = 0.0, a_used = 0.0;
  double x_c = 0.0;
  double T_total = 0.0, t_end = 0.0;
  DecayTrace trace;
  WaveFunction final_state;  ///< kept only by run_propagate
};

struct SlopeRecord {
  double alpha = 0.0;
  double m_alpha = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double C_predicted = 0.0;
  int n_points = 0;
  std::string method;  ///< "lsq" (>= 3 points) or "two_point"
};

struct SweepOutcome {
  std::vector<AlphaPrep> preps;
  std::vector<PointRecord> points;
  std::vector<SlopeRecord> slopes;
  std::string config_hash;
  int failures = 0;
};

// ---------------------------------------------------------------------------
// Orchestrated runs; each writes CSV/JSON under cfg.out_dir and returns the
// in-memory results. Failures of individual points are recorded, not fatal.
// ---------------------------------------------------------------------------

SweepOutcome run_ground_state(const RunConfig& cfg);
SweepOutcome run_calibrate(const RunConfig& cfg);
SweepOutcome run_propagate(const RunConfig& cfg);
SweepOutcome run_benchmark(const RunConfig& cfg);
SweepOutcome run_protocol_sweep(const RunConfig& cfg);
void run_fadk_curves(const RunConfig& cfg);

// Helpers shared by runs and tests.

/// Bound-region half-width: explicit value if configured, otherwise
/// x_c_factor times the 1/e half-width of |psi0|^2, clamped inside the mask.
double choose_x_c(const RatesRunConfig& rates, const WaveFunction& psi0, double x_cap);

/// Propagation budget for one field point: configured T_total, or
/// max(T_total_min, 20 / Gamma_model) capped by T_total_cap, where
/// Gamma_model = exp(-C_alpha / F0).
double resolve_T_total(const PropagationRunConfig& prop, double C_alpha, double F0,
                       double T_ramp, double min_window);

/// One rate table read back from a rates CSV.
struct RateTable {
  std::string config_hash;
  std::vector<std::array<double, 6>> rows;  ///< alpha, F0, gamma, t1, t2, r2
};
RateTable read_rate_table(const std::string& path);

/// Per-alpha slope fits over the union of the given tables. Tables from
/// different configs must not be mixed; a hash mismatch throws config_error.
std::vector<SlopeRecord> fit_slopes_from_tables(const std::vector<RateTable>& tables);

}  // namespace fise

#endif
