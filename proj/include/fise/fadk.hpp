#ifndef FISE_FADK_HPP
#define FISE_FADK_HPP

#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "fise/model.hpp"

namespace fise {

/// Semiclassical tunneling-exponent model for one (alpha, Ip) pair.
/// C_alpha is the slope of -ln(Gamma) against 1/F0.
struct TunnelingModel {
  FractionalOrder alpha;
  double Ip = 0.0;
  double C_alpha = 0.0;
};

TunnelingModel make_tunneling_model(FractionalOrder alpha, double Ip);

/// Under-barrier momentum branch p_n = exp(i(pi + 2 pi n)/alpha) (2W)^{1/alpha}
/// for barrier height W > 0. The n = 0 branch has Im p > 0 on alpha in (1, 2]
/// and reduces to i sqrt(2W) at alpha = 2. Throws std::domain_error for W <= 0.
std::complex<double> branch_momentum(double W, FractionalOrder alpha, int n);

/// Exponent coefficient of the fractional tunneling rate,
///   C_alpha(Ip) = (2 alpha / (alpha + 1)) sin(pi/alpha) 2^{1/alpha} Ip^{1 + 1/alpha},
/// with -ln Gamma = C_alpha / F0 + const. At alpha = 2 this is 2 (2 Ip)^{3/2} / 3.
double fadk_coefficient(FractionalOrder alpha, double Ip);

/// Im S for the triangular barrier W(x) = Ip - F0 x on [0, Ip/F0], integrated
/// numerically: Im S = int sin(pi/alpha) (2(Ip - F0 x))^{1/alpha} dx.
/// Independent check of fadk_coefficient through 2 * Im S * F0 = C_alpha.
/// Adaptive Gauss-Legendre; throws numeric_error if abs_tol cannot be met.
double im_action_quadrature(FractionalOrder alpha, double Ip, double F0, double abs_tol = 1e-10);

/// Model rate curve pinned to a measured rate gamma_ref at F_ref:
///   Gamma_model(F0) = gamma_ref * exp[-C_alpha (1/F0 - 1/F_ref)].
std::vector<std::pair<double, double>> normalized_rate_curve(const TunnelingModel& model,
                                                             double F_ref, double gamma_ref,
                                                             std::span<const double> F_list);

/// Conventional quadratic-dispersion exponent 2 (2 Ip)^{3/2} / (3 F0),
/// i.e. -ln Gamma up to an additive constant.
double adk_exponent(double Ip, double F0);

}  // namespace fise

#endif
