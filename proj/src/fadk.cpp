#include "fise/fadk.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fise/errors.hpp"

namespace fise {

namespace {

// 15-point Gauss-Legendre nodes/weights on [-1, 1] (positive half; the rule
// is symmetric, node 0 listed once).
constexpr int kGlHalf = 8;
constexpr double kGlNode[kGlHalf] = {
    0.0,
    0.2011940939974345223006,
    0.3941513470775633698972,
    0.5709721726085388475372,
    0.7244177313601700474162,
    0.8482065834104272162006,
    0.9372733924007059043078,
    0.9879925180204854284896,
};
constexpr double kGlWeight[kGlHalf] = {
    0.2025782419255612728806,
    0.1984314853271115764561,
    0.1861610000155622110268,
    0.1662692058169939335532,
    0.1395706779261543144478,
    0.1071592204671719350119,
    0.07036604748810812470927,
    0.03075324199611726835463,
};

template <typename F>
double gl15(F&& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double acc = kGlWeight[0] * f(c);
  for (int i = 1; i < kGlHalf; ++i)
    acc += kGlWeight[i] * (f(c - h * kGlNode[i]) + f(c + h * kGlNode[i]));
  return acc * h;
}

// Bisecting adaptive rule: accept a panel once splitting it moves the result
// by less than its share of the tolerance. The panel budget bounds total work
// when the requested tolerance sits below what roundoff permits.
template <typename F>
double adaptive_gl(F&& f, double a, double b, double whole, double tol, int depth,
                   long& panels_left) {
  if (--panels_left < 0 || depth <= 0)
    throw numeric_error("im_action_quadrature: refinement stalled before reaching tolerance");
  const double mid = 0.5 * (a + b);
  const double left = gl15(f, a, mid);
  const double right = gl15(f, mid, b);
  const double delta = left + right - whole;
  if (std::fabs(delta) <= tol) return left + right + delta / 15.0;
  return adaptive_gl(f, a, mid, left, 0.5 * tol, depth - 1, panels_left) +
         adaptive_gl(f, mid, b, right, 0.5 * tol, depth - 1, panels_left);
}

}  // namespace

TunnelingModel make_tunneling_model(FractionalOrder alpha, double Ip) {
  return TunnelingModel{alpha, Ip, fadk_coefficient(alpha, Ip)};
}

std::complex<double> branch_momentum(double W, FractionalOrder alpha, int n) {
  if (!(W > 0.0))
    throw std::domain_error("branch_momentum: barrier height W must be positive, got " +
                            std::to_string(W));
  const double a = alpha.value();
  const double phase = (std::numbers::pi + 2.0 * std::numbers::pi * n) / a;
  const double modulus = std::pow(2.0 * W, 1.0 / a);
  return std::polar(modulus, phase);
}

double fadk_coefficient(FractionalOrder alpha, double Ip) {
  const double a = alpha.value();
  return (2.0 * a / (a + 1.0)) * std::sin(std::numbers::pi / a) * std::pow(2.0, 1.0 / a) *
         std::pow(Ip, 1.0 + 1.0 / a);
}

double im_action_quadrature(FractionalOrder alpha, double Ip, double F0, double abs_tol) {
  if (!(Ip > 0.0) || !(F0 > 0.0))
    throw std::domain_error("im_action_quadrature: requires Ip > 0 and F0 > 0");
  const double a = alpha.value();
  const double sin_factor = std::sin(std::numbers::pi / a);
  const double x_exit = Ip / F0;
  const auto integrand = [&](double x) {
    const double W = Ip - F0 * x;
    // The exit endpoint can land a hair past W = 0 in floating point.
    return W > 0.0 ? sin_factor * std::pow(2.0 * W, 1.0 / a) : 0.0;
  };
  const double whole = gl15(integrand, 0.0, x_exit);
  long panel_budget = 200000;
  return adaptive_gl(integrand, 0.0, x_exit, whole, abs_tol, 60, panel_budget);
}

std::vector<std::pair<double, double>> normalized_rate_curve(const TunnelingModel& model,
                                                             double F_ref, double gamma_ref,
                                                             std::span<const double> F_list) {
  if (!(gamma_ref > 0.0))
    throw std::domain_error("normalized_rate_curve: gamma_ref must be positive");
  std::vector<std::pair<double, double>> out;
  out.reserve(F_list.size());
  for (double F0 : F_list) {
    const double gamma = gamma_ref * std::exp(-model.C_alpha * (1.0 / F0 - 1.0 / F_ref));
    out.emplace_back(F0, gamma);
  }
  return out;
}

double adk_exponent(double Ip, double F0) {
  return 2.0 * std::pow(2.0 * Ip, 1.5) / (3.0 * F0);
}

}  // namespace fise
