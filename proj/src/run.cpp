#include "fise/run.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <thread>

#include "fise/errors.hpp"
#include "fise/fadk.hpp"
#include "fise/io.hpp"

namespace fise {

namespace {

using nlohmann::json;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::string num_tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return std::string(buf);
}

void check_known_keys(const json& j, const std::set<std::string>& known,
                      const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.contains(it.key()))
      throw config_error("config: unknown key '" + it.key() + "' in " + where);
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return std::string(buf);
}

}  // namespace

json config_to_json(const RunConfig& c) {
  json j;
  j["grid"] = {{"L", c.grid.L}, {"N", c.grid.N}, {"require_pow2", c.grid.require_pow2}};
  j["system"] = {{"alphas", c.system.alphas},
                 {"Z", c.system.Z},
                 {"a", c.system.a},
                 {"Ip_target", c.system.Ip_target}};
  j["field"] = {{"F0_list", c.field.F0_list},
                {"ramp_shape", c.field.ramp_shape},
                {"T_ramp", c.field.T_ramp},
                {"F_ref", c.field.F_ref}};
  j["propagation"] = {{"dt", c.propagation.dt},
                      {"T_total", c.propagation.T_total},
                      {"T_total_min", c.propagation.T_total_min},
                      {"T_total_cap", c.propagation.T_total_cap},
                      {"observer_stride", c.propagation.observer_stride},
                      {"stop_Pb_floor", c.propagation.stop_Pb_floor}};
  j["mask"] = {{"x_cap_frac", c.mask.x_cap_frac}, {"eta", c.mask.eta}, {"m", c.mask.m}};
  j["rates"] = {{"x_c", c.rates.x_c},
                {"x_c_factor", c.rates.x_c_factor},
                {"plateau_tolerance", c.rates.plateau_tolerance},
                {"min_window", c.rates.min_window},
                {"rate_floor", c.rates.rate_floor}};
  j["imag_time"] = {{"dtau", c.imag.dtau},
                    {"tol_E", c.imag.tol_E},
                    {"max_steps", c.imag.max_steps},
                    {"tol_Ip", c.imag.tol_Ip}};
  j["protocol"] = c.protocol;
  j["allow_over_bsi"] = c.allow_over_bsi;
  j["workers"] = c.workers;
  j["out_dir"] = c.out_dir;
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  check_known_keys(j,
                   {"grid", "system", "field", "propagation", "mask", "rates", "imag_time",
                    "protocol", "allow_over_bsi", "workers", "out_dir"},
                   "top level");
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    check_known_keys(g, {"L", "N", "require_pow2"}, "grid");
    maybe(g, "L", c.grid.L);
    maybe(g, "N", c.grid.N);
    maybe(g, "require_pow2", c.grid.require_pow2);
  }
  if (j.contains("system")) {
    const auto& s = j.at("system");
    check_known_keys(s, {"alphas", "Z", "a", "Ip_target"}, "system");
    maybe(s, "alphas", c.system.alphas);
    maybe(s, "Z", c.system.Z);
    maybe(s, "a", c.system.a);
    maybe(s, "Ip_target", c.system.Ip_target);
  }
  if (j.contains("field")) {
    const auto& f = j.at("field");
    check_known_keys(f, {"F0_list", "ramp_shape", "T_ramp", "F_ref"}, "field");
    maybe(f, "F0_list", c.field.F0_list);
    maybe(f, "ramp_shape", c.field.ramp_shape);
    maybe(f, "T_ramp", c.field.T_ramp);
    maybe(f, "F_ref", c.field.F_ref);
  }
  if (j.contains("propagation")) {
    const auto& p = j.at("propagation");
    check_known_keys(
        p, {"dt", "T_total", "T_total_min", "T_total_cap", "observer_stride", "stop_Pb_floor"},
        "propagation");
    maybe(p, "dt", c.propagation.dt);
    maybe(p, "T_total", c.propagation.T_total);
    maybe(p, "T_total_min", c.propagation.T_total_min);
    maybe(p, "T_total_cap", c.propagation.T_total_cap);
    maybe(p, "observer_stride", c.propagation.observer_stride);
    maybe(p, "stop_Pb_floor", c.propagation.stop_Pb_floor);
  }
  if (j.contains("mask")) {
    const auto& m = j.at("mask");
    check_known_keys(m, {"x_cap_frac", "eta", "m"}, "mask");
    maybe(m, "x_cap_frac", c.mask.x_cap_frac);
    maybe(m, "eta", c.mask.eta);
    maybe(m, "m", c.mask.m);
  }
  if (j.contains("rates")) {
    const auto& r = j.at("rates");
    check_known_keys(r, {"x_c", "x_c_factor", "plateau_tolerance", "min_window", "rate_floor"},
                     "rates");
    maybe(r, "x_c", c.rates.x_c);
    maybe(r, "x_c_factor", c.rates.x_c_factor);
    maybe(r, "plateau_tolerance", c.rates.plateau_tolerance);
    maybe(r, "min_window", c.rates.min_window);
    maybe(r, "rate_floor", c.rates.rate_floor);
  }
  if (j.contains("imag_time")) {
    const auto& i = j.at("imag_time");
    check_known_keys(i, {"dtau", "tol_E", "max_steps", "tol_Ip"}, "imag_time");
    maybe(i, "dtau", c.imag.dtau);
    maybe(i, "tol_E", c.imag.tol_E);
    maybe(i, "max_steps", c.imag.max_steps);
    maybe(i, "tol_Ip", c.imag.tol_Ip);
  }
  maybe(j, "protocol", c.protocol);
  maybe(j, "allow_over_bsi", c.allow_over_bsi);
  maybe(j, "workers", c.workers);
  maybe(j, "out_dir", c.out_dir);
  return c;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw config_error("cannot open config file '" + path + "'");
  json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw config_error("config file '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

std::string run_config_hash(const RunConfig& cfg) {
  json j = config_to_json(cfg);
  j.erase("out_dir");
  j.erase("workers");
  return hash_hex(fnv1a64(j.dump()));
}

void validate_config(const RunConfig& cfg) {
  if (!(cfg.grid.L > 0.0)) throw config_error("config: grid.L must be positive");
  if (cfg.grid.N < 4 || cfg.grid.N % 2 != 0)
    throw config_error("config: grid.N must be an even integer >= 4");
  if (cfg.grid.require_pow2 && !is_pow2(cfg.grid.N))
    throw config_error("config: grid.N must be a power of two (or set grid.require_pow2 false)");
  if (cfg.system.alphas.empty()) throw config_error("config: system.alphas must be non-empty");
  for (double a : cfg.system.alphas) FractionalOrder check(a);
  if (!(cfg.system.Z > 0.0)) throw config_error("config: system.Z must be positive");
  if (!(cfg.system.a > 0.0)) throw config_error("config: system.a must be positive");
  for (double f : cfg.field.F0_list)
    if (!(f >= 0.0)) throw config_error("config: field values must be >= 0");
  ramp_shape_from_string(cfg.field.ramp_shape);
  if (cfg.field.T_ramp < 0.0) throw config_error("config: field.T_ramp must be >= 0");
  if (!(cfg.propagation.dt > 0.0)) throw config_error("config: propagation.dt must be positive");
  if (cfg.propagation.observer_stride < 1)
    throw config_error("config: propagation.observer_stride must be >= 1");
  if (!(cfg.mask.x_cap_frac > 0.0) || !(cfg.mask.x_cap_frac < 1.0))
    throw config_error("config: mask.x_cap_frac must lie in (0, 1)");
  if (!(cfg.mask.eta > 0.0)) throw config_error("config: mask.eta must be positive");
  if (!(cfg.mask.m >= 2.0)) throw config_error("config: mask.m must be >= 2");
  if (cfg.rates.x_c < 0.0) throw config_error("config: rates.x_c must be >= 0");
  if (!(cfg.rates.plateau_tolerance > 0.0))
    throw config_error("config: rates.plateau_tolerance must be positive");
  if (!(cfg.rates.min_window > 0.0)) throw config_error("config: rates.min_window must be positive");
  if (!(cfg.imag.dtau > 0.0)) throw config_error("config: imag_time.dtau must be positive");
  if (!(cfg.imag.tol_E > 0.0)) throw config_error("config: imag_time.tol_E must be positive");
  if (cfg.protocol != "A" && cfg.protocol != "B")
    throw config_error("config: protocol must be 'A' or 'B'");
  if (cfg.protocol == "B" && !(cfg.system.Ip_target > 0.0))
    throw config_error("config: the fixed-Ip protocol requires system.Ip_target > 0");
}

double choose_x_c(const RatesRunConfig& rates, const WaveFunction& psi0, double x_cap) {
  if (rates.x_c > 0.0) {
    if (rates.x_c >= x_cap)
      throw config_error("rates.x_c must lie inside the mask onset x_cap");
    return rates.x_c;
  }
  const auto& grid = *psi0.grid;
  const size_t j0 = psi0.amplitudes.size() / 2;
  const double peak = std::norm(psi0.amplitudes[j0]);
  double half_width = grid.dx;
  for (size_t j = j0; j < psi0.amplitudes.size(); ++j) {
    if (std::norm(psi0.amplitudes[j]) < peak / std::exp(1.0)) {
      half_width = grid.x_nodes[j];
      break;
    }
  }
  return std::min(rates.x_c_factor * half_width, 0.9 * x_cap);
}

double resolve_T_total(const PropagationRunConfig& prop, double C_alpha, double F0, double T_ramp,
                       double min_window) {
  double T;
  if (prop.T_total > 0.0) {
    T = prop.T_total;
  } else {
    const double gamma_model = std::exp(-C_alpha / F0);
    T = std::max(prop.T_total_min, 20.0 / gamma_model);
    T = std::min(T, prop.T_total_cap);
  }
  // Always leave room for the ramp plus a usable fit window.
  return std::max(T, T_ramp + 4.0 * min_window);
}

// ---------------------------------------------------------------------------
// Internal pipeline
// ---------------------------------------------------------------------------

namespace {

struct RunContext {
  RunConfig cfg;
  std::shared_ptr<const SpatialGrid> grid;
  MaskSpec mask;
  std::string hash;
  std::filesystem::path out;
  bool keep_final = false;
};

RunContext make_context(const RunConfig& cfg) {
  validate_config(cfg);
  RunContext ctx;
  ctx.cfg = cfg;
  ctx.grid = make_shared_grid(cfg.grid.L, cfg.grid.N);
  ctx.mask = MaskSpec{cfg.mask.x_cap_frac * cfg.grid.L, cfg.mask.eta, cfg.mask.m};
  ctx.hash = run_config_hash(cfg);
  ctx.out = cfg.out_dir;
  std::filesystem::create_directories(ctx.out);
  return ctx;
}

GroundStateOptions gs_options(const RunConfig& cfg) {
  GroundStateOptions o;
  o.dtau = cfg.imag.dtau;
  o.tol_E = cfg.imag.tol_E;
  o.max_steps = cfg.imag.max_steps;
  return o;
}

/// Fixed-potential preparation: solve at (Z, a). Fixed-Ip preparation:
/// calibrate a first, then keep the calibrated solve.
AlphaPrep prepare_alpha(const RunContext& ctx, double alpha_value) {
  const auto& cfg = ctx.cfg;
  AlphaPrep prep;
  prep.alpha = alpha_value;
  FractionalOrder alpha(alpha_value);
  if (cfg.protocol == "B") {
    CalibrationOptions copts;
    copts.tol_Ip = cfg.imag.tol_Ip;
    copts.gs = gs_options(cfg);
    CalibrationResult cal =
        calibrate_softcore(alpha, cfg.system.Ip_target, cfg.system.Z, ctx.grid, copts);
    prep.a_used = cal.a_star;
    prep.Ip = cal.achieved_Ip;
    prep.E0 = cal.E0;
    prep.calibration_solves = cal.iterations;
    prep.psi0 = cal.psi0;
    prep.iterations = 0;
  } else {
    GroundStateResult gs =
        solve_ground_state(alpha, SoftCoreSpec{cfg.system.Z, cfg.system.a}, ctx.grid,
                           gs_options(cfg));
    prep.a_used = cfg.system.a;
    prep.Ip = gs.Ip;
    prep.E0 = gs.E0;
    prep.iterations = gs.iterations;
    prep.psi0 = gs.psi0;
  }
  return prep;
}

PointRecord run_point(const RunContext& ctx, const AlphaPrep& prep, double F0) {
  const auto& cfg = ctx.cfg;
  PointRecord rec;
  rec.alpha = prep.alpha;
  rec.F0 = F0;
  rec.Ip = prep.Ip;
  rec.a_used = prep.a_used;
  try {
    const double f_bsi = barrier_suppression_field(prep.Ip, cfg.system.Z);
    if (F0 >= f_bsi) {
      if (!cfg.allow_over_bsi)
        throw config_error("F0 = " + std::to_string(F0) + " is at/above F_BSI = " +
                           std::to_string(f_bsi) + "; set allow_over_bsi to run anyway");
      rec.over_bsi = true;
    }

    FractionalOrder alpha(prep.alpha);
    SystemSpec sys{alpha, SoftCoreSpec{cfg.system.Z, prep.a_used},
                   FieldSpec{F0, ramp_shape_from_string(cfg.field.ramp_shape), cfg.field.T_ramp}};

    PropagationConfig pc;
    pc.step = StepConfig{cfg.propagation.dt, StepMode::real_time, true};
    pc.mask = ctx.mask;
    pc.x_c = choose_x_c(cfg.rates, prep.psi0, ctx.mask.x_cap);
    const double c_pred = fadk_coefficient(alpha, prep.Ip);
    pc.T_total = resolve_T_total(cfg.propagation, c_pred, F0, cfg.field.T_ramp,
                                 cfg.rates.min_window);
    pc.observer_stride = cfg.propagation.observer_stride;
    pc.stop_Pb_floor = cfg.propagation.stop_Pb_floor;

    rec.x_c = pc.x_c;
    rec.T_total = pc.T_total;

    PropagationResult pres = propagate(prep.psi0, sys, pc);
    rec.boundary_warning = pres.boundary_warning;
    rec.t_end = pres.t_end;
    rec.trace = std::move(pres.trace);
    if (ctx.keep_final) rec.final_state = std::move(pres.final_state);

    RateFitOptions fo;
    fo.plateau_tolerance = cfg.rates.plateau_tolerance;
    fo.min_window = cfg.rates.min_window;
    fo.t_min = cfg.field.T_ramp;
    fo.rate_floor = cfg.rates.rate_floor;
    RateFit fit = fit_rate(rec.trace, fo);

    rec.gamma = fit.gamma;
    rec.t1 = fit.t1;
    rec.t2 = fit.t2;
    rec.P0 = fit.P0;
    rec.r_squared = fit.r_squared;
    rec.below_floor = fit.below_floor;
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
  }
  return rec;
}

std::vector<PointRecord> run_points(const RunContext& ctx, const std::vector<AlphaPrep>& preps) {
  struct Job {
    size_t prep_index;
    double F0;
  };
  std::vector<Job> jobs;
  for (size_t ia = 0; ia < preps.size(); ++ia)
    for (double f0 : ctx.cfg.field.F0_list) jobs.push_back({ia, f0});

  std::vector<PointRecord> results(jobs.size());
  const int n_workers =
      ctx.cfg.workers > 0
          ? std::min<int>(ctx.cfg.workers, static_cast<int>(jobs.size()))
          : static_cast<int>(std::min<size_t>(jobs.size(), 64));  // one per pair by default

  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      results[i] = run_point(ctx, preps[jobs[i].prep_index], jobs[i].F0);
    }
  };
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return results;
}

std::vector<SlopeRecord> fit_sweep_slopes(const RunContext& ctx,
                                          const std::vector<AlphaPrep>& preps,
                                          const std::vector<PointRecord>& points) {
  std::vector<SlopeRecord> slopes;
  for (const auto& prep : preps) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& rec : points)
      if (rec.ok && !rec.below_floor && rec.alpha == prep.alpha && rec.gamma > 0.0)
        pts.emplace_back(rec.F0, rec.gamma);
    if (pts.size() < 2) continue;
    SlopeRecord s;
    s.alpha = prep.alpha;
    s.n_points = static_cast<int>(pts.size());
    const double ip_for_model =
        ctx.cfg.protocol == "B" ? ctx.cfg.system.Ip_target : prep.Ip;
    s.C_predicted = fadk_coefficient(FractionalOrder(prep.alpha), ip_for_model);
    if (pts.size() >= 3) {
      SlopeFit fit = fit_slope(prep.alpha, pts);
      s.m_alpha = fit.m_alpha;
      s.intercept = fit.intercept;
      s.r_squared = fit.r_squared;
      s.method = "lsq";
    } else {
      const double u1 = 1.0 / pts[0].first, u2 = 1.0 / pts[1].first;
      const double y1 = -std::log(pts[0].second), y2 = -std::log(pts[1].second);
      s.m_alpha = (y2 - y1) / (u2 - u1);
      s.intercept = y1 - s.m_alpha * u1;
      s.r_squared = 1.0;
      s.method = "two_point";
    }
    slopes.push_back(s);
  }
  return slopes;
}

// --- CSV writers -----------------------------------------------------------

void write_rates_csv(const RunContext& ctx, const std::vector<PointRecord>& points) {
  CsvTable t;
  t.schema = "fise.rates.v1";
  t.config_hash = ctx.hash;
  t.header = {"alpha", "F0", "gamma", "t1", "t2", "r2"};
  for (const auto& rec : points) {
    if (!rec.ok) continue;
    t.rows.push_back({format_double(rec.alpha), format_double(rec.F0), format_double(rec.gamma),
                      format_double(rec.t1), format_double(rec.t2),
                      format_double(rec.r_squared)});
  }
  write_csv((ctx.out / "rates.csv").string(), t);
}

void write_warnings_csv(const RunContext& ctx, const std::vector<PointRecord>& points) {
  CsvTable t;
  t.schema = "fise.warnings.v1";
  t.config_hash = ctx.hash;
  t.header = {"alpha", "F0", "code", "message"};
  for (const auto& rec : points) {
    const std::string a = format_double(rec.alpha), f = format_double(rec.F0);
    if (!rec.ok) t.rows.push_back({a, f, "point_failed", rec.error});
    if (rec.over_bsi)
      t.rows.push_back({a, f, "over_bsi", "field at/above the barrier-suppression estimate"});
    if (rec.boundary_warning)
      t.rows.push_back({a, f, "boundary", "probability beyond the mask onset exceeded 0.2"});
    if (rec.ok && rec.below_floor)
      t.rows.push_back({a, f, "below_floor", "no measurable decay at the rate floor"});
  }
  write_csv((ctx.out / "warnings.csv").string(), t);
}

void write_trace_csvs(const RunContext& ctx, const std::vector<PointRecord>& points) {
  for (const auto& rec : points) {
    if (!rec.ok || rec.trace.times.empty()) continue;
    CsvTable t;
    t.schema = "fise.trace.v1";
    t.config_hash = ctx.hash;
    t.header = {"t", "Pb", "Gamma_inst"};
    std::vector<std::pair<double, double>> ginst;
    try {
      ginst = instantaneous_rate(rec.trace);
    } catch (const std::exception&) {
      // non-positive samples: leave the column empty
    }
    for (size_t i = 0; i < rec.trace.times.size(); ++i) {
      t.rows.push_back({format_double(rec.trace.times[i]), format_double(rec.trace.Pb[i]),
                        ginst.empty() ? std::string("nan") : format_double(ginst[i].second)});
    }
    const std::string name =
        "trace_alpha" + num_tag(rec.alpha) + "_F" + num_tag(rec.F0) + ".csv";
    write_csv((ctx.out / name).string(), t);
  }
}

void write_slopes_csv(const RunContext& ctx, const std::vector<SlopeRecord>& slopes) {
  CsvTable t;
  t.schema = "fise.slopes.v1";
  t.config_hash = ctx.hash;
  t.header = {"alpha", "m_alpha", "intercept", "r2", "C_alpha_predicted"};
  for (const auto& s : slopes)
    t.rows.push_back({format_double(s.alpha), format_double(s.m_alpha),
                      format_double(s.intercept), format_double(s.r_squared),
                      format_double(s.C_predicted)});
  write_csv((ctx.out / "slopes.csv").string(), t);
}

void write_ground_state_csv(const RunContext& ctx, const std::vector<AlphaPrep>& preps) {
  CsvTable t;
  t.schema = "fise.ground_state.v1";
  t.config_hash = ctx.hash;
  t.header = {"alpha", "Z", "a", "E0", "Ip", "iterations"};
  for (const auto& p : preps)
    t.rows.push_back({format_double(p.alpha), format_double(ctx.cfg.system.Z),
                      format_double(p.a_used), format_double(p.E0), format_double(p.Ip),
                      std::to_string(p.iterations)});
  write_csv((ctx.out / "ground_state.csv").string(), t);
}

void write_calibration_csv(const RunContext& ctx, const std::vector<AlphaPrep>& preps) {
  CsvTable t;
  t.schema = "fise.calibration.v1";
  t.config_hash = ctx.hash;
  t.header = {"alpha", "Z", "a_star", "achieved_Ip", "iterations"};
  for (const auto& p : preps)
    t.rows.push_back({format_double(p.alpha), format_double(ctx.cfg.system.Z),
                      format_double(p.a_used), format_double(p.Ip),
                      std::to_string(p.calibration_solves)});
  write_csv((ctx.out / "calibration.csv").string(), t);
}

void write_model_curves_csv(const RunContext& ctx, const std::vector<AlphaPrep>& preps,
                            const std::vector<PointRecord>& points) {
  CsvTable t;
  t.schema = "fise.model_curves.v1";
  t.config_hash = ctx.hash;
  t.header = {"alpha", "F0", "inv_F0", "gamma_model", "minus_ln_gamma_model"};
  for (const auto& prep : preps) {
    const PointRecord* ref = nullptr;
    for (const auto& rec : points)
      if (rec.ok && rec.alpha == prep.alpha && rec.F0 == ctx.cfg.field.F_ref) ref = &rec;
    if (ref == nullptr || !(ref->gamma > 0.0)) continue;
    const double ip_for_model =
        ctx.cfg.protocol == "B" ? ctx.cfg.system.Ip_target : prep.Ip;
    const TunnelingModel model =
        make_tunneling_model(FractionalOrder(prep.alpha), ip_for_model);
    const auto curve = normalized_rate_curve(model, ctx.cfg.field.F_ref, ref->gamma,
                                             ctx.cfg.field.F0_list);
    for (const auto& [f0, gamma] : curve)
      t.rows.push_back({format_double(prep.alpha), format_double(f0), format_double(1.0 / f0),
                        format_double(gamma), format_double(-std::log(gamma))});
  }
  write_csv((ctx.out / "model_curves.csv").string(), t);
}

void write_summary_json(const RunContext& ctx, const std::string& command,
                        const std::vector<AlphaPrep>& preps,
                        const std::vector<PointRecord>& points,
                        const std::vector<SlopeRecord>& slopes, int failures) {
  json j;
  j["command"] = command;
  j["config"] = config_to_json(ctx.cfg);
  j["config_hash"] = ctx.hash;
  j["generated_utc"] = utc_now();
  j["failures"] = failures;
  j["preparations"] = json::array();
  for (const auto& p : preps)
    j["preparations"].push_back({{"alpha", p.alpha},
                                 {"a", p.a_used},
                                 {"E0", p.E0},
                                 {"Ip", p.Ip},
                                 {"imaginary_time_steps", p.iterations},
                                 {"calibration_solves", p.calibration_solves}});
  j["points"] = json::array();
  for (const auto& rec : points) {
    json p = {{"alpha", rec.alpha},       {"F0", rec.F0},
              {"ok", rec.ok},             {"gamma", rec.gamma},
              {"t1", rec.t1},             {"t2", rec.t2},
              {"r2", rec.r_squared},      {"x_c", rec.x_c},
              {"T_total", rec.T_total},   {"t_end", rec.t_end},
              {"below_floor", rec.below_floor}, {"over_bsi", rec.over_bsi},
              {"boundary_warning", rec.boundary_warning}};
    if (!rec.ok) p["error"] = rec.error;
    j["points"].push_back(p);
  }
  j["slopes"] = json::array();
  for (const auto& s : slopes)
    j["slopes"].push_back({{"alpha", s.alpha},
                           {"m_alpha", s.m_alpha},
                           {"intercept", s.intercept},
                           {"r2", s.r_squared},
                           {"C_alpha_predicted", s.C_predicted},
                           {"n_points", s.n_points},
                           {"method", s.method}});
  std::ofstream os(ctx.out / "summary.json");
  os << j.dump(2) << "\n";
}

int count_failures(const std::vector<PointRecord>& points) {
  int n = 0;
  for (const auto& rec : points)
    if (!rec.ok) ++n;
  return n;
}

}  // namespace

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

SweepOutcome run_ground_state(const RunConfig& cfg) {
  RunContext ctx = make_context(cfg);
  SweepOutcome out;
  out.config_hash = ctx.hash;
  for (double a : cfg.system.alphas) {
    AlphaPrep prep = prepare_alpha(ctx, a);
    const std::string name = "psi0_alpha" + num_tag(a) + ".wfn";
    save_wavefunction((ctx.out / name).string(), prep.psi0, a, 0.0, 0);
    out.preps.push_back(std::move(prep));
  }
  write_ground_state_csv(ctx, out.preps);
  if (cfg.protocol == "B") write_calibration_csv(ctx, out.preps);
  write_summary_json(ctx, "ground-state", out.preps, {}, {}, 0);
  return out;
}

SweepOutcome run_calibrate(const RunConfig& cfg) {
  RunConfig c = cfg;
  c.protocol = "B";  // calibration is the fixed-Ip preparation
  RunContext ctx = make_context(c);
  SweepOutcome out;
  out.config_hash = ctx.hash;
  for (double a : c.system.alphas) {
    AlphaPrep prep = prepare_alpha(ctx, a);
    const std::string name = "psi0_alpha" + num_tag(a) + ".wfn";
    save_wavefunction((ctx.out / name).string(), prep.psi0, a, 0.0, 0);
    out.preps.push_back(std::move(prep));
  }
  write_calibration_csv(ctx, out.preps);
  write_summary_json(ctx, "calibrate", out.preps, {}, {}, 0);
  return out;
}

SweepOutcome run_propagate(const RunConfig& cfg) {
  RunContext ctx = make_context(cfg);
  ctx.keep_final = true;
  SweepOutcome out;
  out.config_hash = ctx.hash;
  for (double a : cfg.system.alphas) out.preps.push_back(prepare_alpha(ctx, a));
  out.points = run_points(ctx, out.preps);
  out.failures = count_failures(out.points);
  write_rates_csv(ctx, out.points);
  write_trace_csvs(ctx, out.points);
  write_warnings_csv(ctx, out.points);
  for (const auto& rec : out.points) {
    if (!rec.ok) continue;
    const std::string name =
        "final_alpha" + num_tag(rec.alpha) + "_F" + num_tag(rec.F0) + ".wfn";
    save_wavefunction((ctx.out / name).string(), rec.final_state, rec.alpha, rec.t_end,
                      kCheckpointFlagRealTime);
  }
  write_summary_json(ctx, "propagate", out.preps, out.points, {}, out.failures);
  return out;
}

SweepOutcome run_benchmark(const RunConfig& cfg) {
  if (cfg.system.alphas.size() != 1 || cfg.system.alphas[0] != 2.0)
    throw config_error("benchmark: system.alphas must be exactly [2.0]");
  RunContext ctx = make_context(cfg);
  SweepOutcome out;
  out.config_hash = ctx.hash;
  out.preps.push_back(prepare_alpha(ctx, 2.0));
  out.points = run_points(ctx, out.preps);
  out.failures = count_failures(out.points);
  out.slopes = fit_sweep_slopes(ctx, out.preps, out.points);

  write_rates_csv(ctx, out.points);
  write_trace_csvs(ctx, out.points);
  write_warnings_csv(ctx, out.points);
  write_slopes_csv(ctx, out.slopes);

  // Ratio of measured rates to the conventional-exponent curve pinned at F_ref.
  const PointRecord* ref = nullptr;
  for (const auto& rec : out.points)
    if (rec.ok && rec.F0 == cfg.field.F_ref) ref = &rec;
  CsvTable t;
  t.schema = "fise.ratio.v1";
  t.config_hash = ctx.hash;
  t.header = {"F0", "inv_F0", "gamma_tdse", "gamma_model", "ratio"};
  if (ref != nullptr && ref->gamma > 0.0) {
    const TunnelingModel model =
        make_tunneling_model(FractionalOrder(2.0), out.preps[0].Ip);
    for (const auto& rec : out.points) {
      if (!rec.ok || !(rec.gamma > 0.0)) continue;
      const double f_list[1] = {rec.F0};
      const double gamma_model =
          normalized_rate_curve(model, cfg.field.F_ref, ref->gamma, f_list)[0].second;
      t.rows.push_back({format_double(rec.F0), format_double(1.0 / rec.F0),
                        format_double(rec.gamma), format_double(gamma_model),
                        format_double(rec.gamma / gamma_model)});
    }
  } else {
    ++out.failures;  // no reference point: the ratio table cannot be produced
  }
  write_csv((ctx.out / "ratio.csv").string(), t);
  write_summary_json(ctx, "benchmark", out.preps, out.points, out.slopes, out.failures);
  return out;
}

SweepOutcome run_protocol_sweep(const RunConfig& cfg) {
  RunContext ctx = make_context(cfg);
  SweepOutcome out;
  out.config_hash = ctx.hash;
  for (double a : cfg.system.alphas) {
    try {
      out.preps.push_back(prepare_alpha(ctx, a));
    } catch (const std::exception& e) {
      // Calibration failure aborts this alpha only.
      PointRecord rec;
      rec.alpha = a;
      rec.ok = false;
      rec.error = std::string("preparation failed: ") + e.what();
      out.points.push_back(rec);
      ++out.failures;
    }
  }
  auto sim_points = run_points(ctx, out.preps);
  out.failures += count_failures(sim_points);
  for (auto& rec : sim_points) out.points.push_back(std::move(rec));
  out.slopes = fit_sweep_slopes(ctx, out.preps, out.points);

  write_rates_csv(ctx, out.points);
  write_trace_csvs(ctx, out.points);
  write_warnings_csv(ctx, out.points);
  write_slopes_csv(ctx, out.slopes);
  write_model_curves_csv(ctx, out.preps, out.points);
  if (cfg.protocol == "B") write_calibration_csv(ctx, out.preps);
  write_summary_json(ctx, std::string("sweep-") + cfg.protocol, out.preps, out.points, out.slopes,
                     out.failures);
  return out;
}

void run_fadk_curves(const RunConfig& cfg) {
  if (!(cfg.system.Ip_target > 0.0))
    throw config_error("fadk-curves: system.Ip_target must be set (the model needs Ip)");
  RunContext ctx = make_context(cfg);
  CsvTable t;
  t.schema = "fise.fadk_curves.v1";
  t.config_hash = ctx.hash;
  t.header = {"alpha", "inv_F0", "minus_ln_gamma"};
  for (double a : cfg.system.alphas) {
    const double c = fadk_coefficient(FractionalOrder(a), cfg.system.Ip_target);
    for (double f0 : cfg.field.F0_list)
      t.rows.push_back(
          {format_double(a), format_double(1.0 / f0), format_double(c / f0)});
  }
  write_csv((ctx.out / "fadk_curves.csv").string(), t);
}

RateTable read_rate_table(const std::string& path) {
  const CsvTable csv = read_csv(path);
  if (csv.schema != "fise.rates.v1")
    throw config_error("read_rate_table: '" + path + "' has schema '" + csv.schema +
                       "', expected fise.rates.v1");
  RateTable table;
  table.config_hash = csv.config_hash;
  for (const auto& row : csv.rows) {
    if (row.size() != 6) throw config_error("read_rate_table: malformed row in '" + path + "'");
    std::array<double, 6> vals{};
    for (size_t i = 0; i < 6; ++i) vals[i] = std::stod(row[i]);
    table.rows.push_back(vals);
  }
  return table;
}

std::vector<SlopeRecord> fit_slopes_from_tables(const std::vector<RateTable>& tables) {
  if (tables.empty()) return {};
  const std::string& hash = tables.front().config_hash;
  for (const auto& t : tables)
    if (t.config_hash != hash)
      throw config_error("fit_slopes_from_tables: rate tables come from different configs (" +
                         hash + " vs " + t.config_hash + ")");
  std::map<double, std::vector<std::pair<double, double>>> by_alpha;
  for (const auto& t : tables)
    for (const auto& row : t.rows) by_alpha[row[0]].emplace_back(row[1], row[2]);
  std::vector<SlopeRecord> out;
  for (const auto& [alpha, pts] : by_alpha) {
    if (pts.size() < 3) continue;
    SlopeFit fit = fit_slope(alpha, pts);
    SlopeRecord s;
    s.alpha = alpha;
    s.m_alpha = fit.m_alpha;
    s.intercept = fit.intercept;
    s.r_squared = fit.r_squared;
    s.n_points = static_cast<int>(pts.size());
    s.method = "lsq";
    out.push_back(s);
  }
  return out;
}

}  // namespace fise
