#ifndef FISE_RATES_HPP
#define FISE_RATES_HPP

#include <span>
#include <utility>
#include <vector>

namespace fise {

struct WaveFunction;  // prop.hpp

/// Time series of the bound-region survival probability
/// P_b(t) = integral of |psi|^2 over |x| <= x_c.
struct DecayTrace {
  std::vector<double> times;  ///< strictly increasing (a.u.)
  std::vector<double> Pb;
  double x_c = 0.0;  ///< bound-region half-width (bohr)
};

/// P_b for one state: sum of |psi(x_j)|^2 dx over nodes with |x_j| <= x_c.
double survival_probability(const WaveFunction& psi, double x_c);

/// Gamma_inst(t) = -d ln P_b / dt by central differences on the sample grid
/// (one-sided at the ends). Needs >= 3 samples and P_b > 0 everywhere;
/// throws std::domain_error otherwise.
std::vector<std::pair<double, double>> instantaneous_rate(const DecayTrace& trace);

struct RateFitOptions {
  double plateau_tolerance = 0.10;  ///< allowed spread of Gamma_inst around its window median
  double min_window = 50.0;         ///< shortest acceptable fit window (a.u.)
  double t_min = 0.0;               ///< earliest admissible window start (ramp end)
  double rate_floor = 1e-12;        ///< below this the fit reports "no measurable decay"
  int max_search_samples = 320;     ///< decimation target for the window search
};

struct RateFit {
  double gamma = 0.0;  ///< decay rate from ln P_b regression over [t1, t2]
  double t1 = 0.0;
  double t2 = 0.0;
  double P0 = 0.0;          ///< fitted amplitude exp(intercept)
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> gamma_inst;
  bool below_floor = false;  ///< gamma < rate_floor: no measurable decay
};

/// Picks the longest window [t1, t2] (>= min_window, t1 >= t_min) on which
/// Gamma_inst stays within plateau_tolerance of its window median, then
/// fits ln P_b linearly over it. Throws no_plateau_error when no window
/// qualifies.
RateFit fit_rate(const DecayTrace& trace, const RateFitOptions& opts = {});

/// Least-squares line of -ln(gamma) against 1/F0.
struct SlopeFit {
  double alpha = 0.0;
  std::vector<std::pair<double, double>> points;  ///< (F0, gamma)
  double m_alpha = 0.0;                           ///< fitted slope
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Requires >= 3 points, all gamma > 0, all F0 distinct.
SlopeFit fit_slope(double alpha, std::span<const std::pair<double, double>> points);

}  // namespace fise

#endif
