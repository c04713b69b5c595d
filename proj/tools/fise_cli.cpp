// Command-line driver: ground-state solves, soft-core calibration, single
// propagations, field sweeps under the fixed-potential (A) and fixed-Ip (B)
// protocols, the alpha = 2 benchmark, and analytic tunneling-exponent curves.
// All numbers land as CSV/JSON under --out.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fise/errors.hpp"
#include "fise/run.hpp"

namespace {

struct CliOverrides {
  std::string config_path;
  std::string out_dir;
  std::vector<double> alphas;
  std::vector<double> F0_list;
  double L = -1.0;
  int N = -1;
  double Z = -1.0;
  double a = -1.0;
  double Ip_target = -1.0;
  double dt = -1.0;
  double T_total = -1.0;
  double T_ramp = -1.0;
  std::string ramp_shape;
  double F_ref = -1.0;
  double eta = -1.0;
  double mask_m = -1.0;
  double x_cap_frac = -1.0;
  double x_c = -1.0;
  double plateau_tol = -1.0;
  double min_window = -1.0;
  int observer_stride = -1;
  double stop_Pb_floor = -1.0;
  double dtau = -1.0;
  double tol_Ip = -1.0;
  std::string protocol;
  bool allow_over_bsi = false;
  int workers = -1;
};

void add_common_flags(CLI::App* cmd, CliOverrides& o) {
  cmd->add_option("--config", o.config_path, "JSON config file (flags override it)");
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--alpha", o.alphas, "fractional order(s), each in (1, 2]");
  cmd->add_option("--F0", o.F0_list, "static field peak strength(s) (a.u.)");
  cmd->add_option("--L", o.L, "box half-width (bohr)");
  cmd->add_option("--N", o.N, "grid points (power of two)");
  cmd->add_option("--Z", o.Z, "soft-core charge");
  cmd->add_option("--a", o.a, "soft-core softening parameter (bohr)");
  cmd->add_option("--Ip-target", o.Ip_target, "target ionization potential (a.u.)");
  cmd->add_option("--dt", o.dt, "real-time step (a.u.)");
  cmd->add_option("--T-total", o.T_total, "propagation time per field point (a.u.)");
  cmd->add_option("--T-ramp", o.T_ramp, "field ramp duration (a.u.)");
  cmd->add_option("--ramp", o.ramp_shape, "ramp shape: none|linear|sin2");
  cmd->add_option("--F-ref", o.F_ref, "reference field for normalized model curves");
  cmd->add_option("--eta", o.eta, "mask strength");
  cmd->add_option("--mask-m", o.mask_m, "mask exponent");
  cmd->add_option("--x-cap-frac", o.x_cap_frac, "mask onset as a fraction of L");
  cmd->add_option("--x-c", o.x_c, "bound-region half-width (bohr, 0 = automatic)");
  cmd->add_option("--plateau-tol", o.plateau_tol, "plateau tolerance for the rate fit");
  cmd->add_option("--min-window", o.min_window, "minimum fit window (a.u.)");
  cmd->add_option("--observer-stride", o.observer_stride, "steps between P_b samples");
  cmd->add_option("--stop-Pb-floor", o.stop_Pb_floor, "early-stop threshold on P_b (0 = off)");
  cmd->add_option("--dtau", o.dtau, "imaginary-time step (a.u.)");
  cmd->add_option("--tol-Ip", o.tol_Ip, "calibration tolerance on Ip (a.u.)");
  cmd->add_option("--protocol", o.protocol, "A (fixed potential) or B (fixed Ip)");
  cmd->add_flag("--allow-over-bsi", o.allow_over_bsi,
                "permit fields at/above the barrier-suppression estimate");
  cmd->add_option("--workers", o.workers, "sweep workers (0 = one per alpha,F0 pair)");
}

fise::RunConfig resolve_config(const CliOverrides& o) {
  fise::RunConfig cfg;
  if (!o.config_path.empty()) cfg = fise::load_config_file(o.config_path);
  if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
  if (!o.alphas.empty()) cfg.system.alphas = o.alphas;
  if (!o.F0_list.empty()) cfg.field.F0_list = o.F0_list;
  if (o.L > 0) cfg.grid.L = o.L;
  if (o.N > 0) cfg.grid.N = o.N;
  if (o.Z > 0) cfg.system.Z = o.Z;
  if (o.a > 0) cfg.system.a = o.a;
  if (o.Ip_target > 0) cfg.system.Ip_target = o.Ip_target;
  if (o.dt > 0) cfg.propagation.dt = o.dt;
  if (o.T_total > 0) cfg.propagation.T_total = o.T_total;
  if (o.T_ramp >= 0) cfg.field.T_ramp = o.T_ramp;
  if (!o.ramp_shape.empty()) cfg.field.ramp_shape = o.ramp_shape;
  if (o.F_ref > 0) cfg.field.F_ref = o.F_ref;
  if (o.eta > 0) cfg.mask.eta = o.eta;
  if (o.mask_m > 0) cfg.mask.m = o.mask_m;
  if (o.x_cap_frac > 0) cfg.mask.x_cap_frac = o.x_cap_frac;
  if (o.x_c >= 0) cfg.rates.x_c = o.x_c;
  if (o.plateau_tol > 0) cfg.rates.plateau_tolerance = o.plateau_tol;
  if (o.min_window > 0) cfg.rates.min_window = o.min_window;
  if (o.observer_stride > 0) cfg.propagation.observer_stride = o.observer_stride;
  if (o.stop_Pb_floor >= 0) cfg.propagation.stop_Pb_floor = o.stop_Pb_floor;
  if (o.dtau > 0) cfg.imag.dtau = o.dtau;
  if (o.tol_Ip > 0) cfg.imag.tol_Ip = o.tol_Ip;
  if (!o.protocol.empty()) cfg.protocol = o.protocol;
  if (o.allow_over_bsi) cfg.allow_over_bsi = true;
  if (o.workers >= 0) cfg.workers = o.workers;
  return cfg;
}

int report(const fise::SweepOutcome& outcome) {
  for (const auto& rec : outcome.points) {
    if (rec.ok) {
      std::printf("alpha=%-5g F0=%-7g gamma=%.6e  window=[%g, %g]  r2=%.6f%s\n", rec.alpha,
                  rec.F0, rec.gamma, rec.t1, rec.t2, rec.r_squared,
                  rec.below_floor ? "  (below rate floor)" : "");
    } else if (rec.F0 > 0.0) {
      std::fprintf(stderr, "FAILED alpha=%g F0=%g: %s\n", rec.alpha, rec.F0, rec.error.c_str());
    } else {
      std::fprintf(stderr, "FAILED alpha=%g: %s\n", rec.alpha, rec.error.c_str());
    }
  }
  for (const auto& s : outcome.slopes)
    std::printf("alpha=%-5g slope m=%.6f  (model C=%.6f, %s over %d points)\n", s.alpha,
                s.m_alpha, s.C_predicted, s.method.c_str(), s.n_points);
  if (outcome.failures > 0)
    std::fprintf(stderr, "%d point(s) failed\n", outcome.failures);
  return outcome.failures > 0 ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Static-field tunneling ionization in space-fractional quantum mechanics"};
  app.require_subcommand(1);

  CliOverrides o;

  auto* cmd_gs = app.add_subcommand("ground-state", "field-free ground states per alpha");
  auto* cmd_cal = app.add_subcommand("calibrate", "tune the soft-core parameter to hit Ip");
  auto* cmd_prop = app.add_subcommand("propagate", "single propagations with rate extraction");
  auto* cmd_bench = app.add_subcommand("benchmark", "alpha = 2 sweep against the conventional exponent");
  auto* cmd_sweep = app.add_subcommand("sweep", "field sweep per alpha under protocol A or B");
  auto* cmd_curves = app.add_subcommand("fadk-curves", "analytic exponent curves per alpha");
  auto* cmd_ref = app.add_subcommand("config-reference", "print the default config JSON");
  for (auto* cmd : {cmd_gs, cmd_cal, cmd_prop, cmd_bench, cmd_sweep, cmd_curves})
    add_common_flags(cmd, o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_ref->parsed()) {
      std::printf("%s\n", fise::config_to_json(fise::RunConfig{}).dump(2).c_str());
      return 0;
    }
    fise::RunConfig cfg = resolve_config(o);
    if (cmd_gs->parsed()) {
      auto outcome = fise::run_ground_state(cfg);
      for (const auto& p : outcome.preps)
        std::printf("alpha=%-5g a=%-8g E0=%.8f  Ip=%.8f  steps=%ld\n", p.alpha, p.a_used, p.E0,
                    p.Ip, p.iterations);
      return 0;
    }
    if (cmd_cal->parsed()) {
      auto outcome = fise::run_calibrate(cfg);
      for (const auto& p : outcome.preps)
        std::printf("alpha=%-5g a*=%-10.6f achieved_Ip=%.6f  solves=%d\n", p.alpha, p.a_used,
                    p.Ip, p.calibration_solves);
      return 0;
    }
    if (cmd_prop->parsed()) return report(fise::run_propagate(cfg));
    if (cmd_bench->parsed()) return report(fise::run_benchmark(cfg));
    if (cmd_sweep->parsed()) return report(fise::run_protocol_sweep(cfg));
    if (cmd_curves->parsed()) {
      fise::run_fadk_curves(cfg);
      std::printf("wrote %s/fadk_curves.csv\n", cfg.out_dir.c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
