#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "fise/errors.hpp"
#include "fise/prop.hpp"
#include "fise/rates.hpp"
#include "oracles.hpp"

using namespace fise;

TEST_CASE("survival probability of localized and displaced states") {
  auto grid = make_shared_grid(60.0, 2048);
  const auto centered = gaussian_state(grid, 1.0);
  CHECK(survival_probability(centered, 30.0) == doctest::Approx(1.0).epsilon(1e-12));

  const auto displaced = gaussian_state(grid, 1.0, 45.0);
  CHECK(survival_probability(displaced, 10.0) < 1e-12);

  CHECK_THROWS_AS(survival_probability(centered, 0.0), config_error);
  CHECK_THROWS_AS(survival_probability(centered, 60.0), config_error);
}

TEST_CASE("bound probability of a unit Gaussian matches the error function") {
  auto grid = make_shared_grid(60.0, 8192);
  const auto psi = gaussian_state(grid, 1.0);  // |psi|^2 = exp(-x^2)/sqrt(pi)

  // cut midway between nodes so the node sum is a midpoint rule
  const double x_c = 1.0 + 0.5 * grid->dx - std::fmod(1.0, grid->dx);
  const double p = survival_probability(psi, x_c);

  // independent Riemann oracle over the same nodes
  double riemann = 0.0;
  for (double x : grid->x_nodes)
    if (std::fabs(x) <= x_c) riemann += std::exp(-x * x) / std::sqrt(std::numbers::pi);
  riemann *= grid->dx;
  CHECK(p == doctest::Approx(riemann).epsilon(1e-10));

  // the node sum is a midpoint rule for the integral up to the cut
  CHECK(std::fabs(p - std::erf(x_c)) < 1e-5);
  // erf(1) = 0.84270079295..., approached within the half-spacing of the cut
  CHECK(std::fabs(p - 0.84270079295) < 2e-3);
}

TEST_CASE("instantaneous rate of synthetic traces") {
  const auto exp_trace =
      oracles::make_trace(0.0, 400.0, 2.0, [](double t) { return std::exp(-0.01 * t); });
  for (const auto& [t, g] : instantaneous_rate(exp_trace))
    CHECK(g == doctest::Approx(0.01).epsilon(1e-12));

  const auto const_trace = oracles::make_trace(0.0, 100.0, 1.0, [](double) { return 0.5; });
  for (const auto& [t, g] : instantaneous_rate(const_trace)) CHECK(g == doctest::Approx(0.0));

  const auto biexp = oracles::make_trace(0.0, 500.0, 1.0, [](double t) {
    return 0.9 * std::exp(-0.02 * t) + 0.1 * std::exp(-0.5 * t);
  });
  const auto gi = instantaneous_rate(biexp);
  CHECK(gi.front().second > gi.back().second);       // fast component dies out
  CHECK(gi.back().second == doctest::Approx(0.02).epsilon(0.01));

  DecayTrace bad;
  bad.times = {0.0, 1.0};
  bad.Pb = {1.0, 0.9};
  CHECK_THROWS_AS(instantaneous_rate(bad), std::domain_error);
  bad.times = {0.0, 1.0, 2.0};
  bad.Pb = {1.0, 0.0, 0.5};
  CHECK_THROWS_AS(instantaneous_rate(bad), std::domain_error);
}

TEST_CASE("rate fit recovers a pure exponential over the full trace") {
  const auto trace =
      oracles::make_trace(0.0, 600.0, 2.0, [](double t) { return std::exp(-0.01 * t); });
  const RateFit fit = fit_rate(trace);
  CHECK(std::fabs(fit.gamma - 0.01) < 1e-10);
  CHECK(fit.t1 == doctest::Approx(trace.times.front()));
  CHECK(fit.t2 == doctest::Approx(trace.times.back()));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(!fit.below_floor);
}

TEST_CASE("rate fit isolates the dominant component of a biexponential") {
  const auto trace = oracles::make_trace(0.0, 2000.0, 1.0, [](double t) {
    return 0.9 * std::exp(-0.02 * t) + 0.1 * std::exp(-0.5 * t);
  });
  const RateFit fit = fit_rate(trace);
  CHECK(std::fabs(fit.gamma - 0.02) / 0.02 < 0.01);
  CHECK(fit.t1 > 0.0);  // the fast transient is excluded
}

TEST_CASE("constant trace reports no measurable decay") {
  const auto trace = oracles::make_trace(0.0, 500.0, 2.0, [](double) { return 0.73; });
  const RateFit fit = fit_rate(trace);
  CHECK(fit.below_floor);
  CHECK(std::fabs(fit.gamma) < 1e-12);
}

TEST_CASE("rate fit is invariant under uniform rescaling of the trace") {
  auto trace = oracles::make_trace(0.0, 2000.0, 1.0, [](double t) {
    return 0.9 * std::exp(-0.02 * t) + 0.1 * std::exp(-0.5 * t);
  });
  const RateFit base = fit_rate(trace);
  for (auto& p : trace.Pb) p *= 3.7;
  const RateFit scaled = fit_rate(trace);
  CHECK(std::fabs(scaled.gamma - base.gamma) <= 1e-12 * base.gamma);
  CHECK(scaled.t1 == doctest::Approx(base.t1));
  CHECK(scaled.t2 == doctest::Approx(base.t2));
  CHECK(scaled.P0 == doctest::Approx(3.7 * base.P0).epsilon(1e-10));
}

TEST_CASE("fitted rate is stable under moderate window shifts") {
  const auto trace = oracles::make_trace(0.0, 2000.0, 1.0, [](double t) {
    return 0.9 * std::exp(-0.02 * t) + 0.1 * std::exp(-0.5 * t);
  });
  const RateFit fit = fit_rate(trace);
  const double len = fit.t2 - fit.t1;

  auto regress = [&](double t1, double t2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (size_t i = 0; i < trace.times.size(); ++i) {
      if (trace.times[i] < t1 || trace.times[i] > t2) continue;
      const double x = trace.times[i], y = std::log(trace.Pb[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++n;
    }
    return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
  };

  const double shift = 0.10 * len;
  const double right = regress(fit.t1 + shift, std::min(fit.t2 + shift, trace.times.back()));
  const double left = regress(std::max(fit.t1 - shift, trace.times.front()), fit.t2 - shift);
  CHECK(std::fabs(right - fit.gamma) / fit.gamma < 0.02);
  CHECK(std::fabs(left - fit.gamma) / fit.gamma < 0.02);
}

TEST_CASE("no plateau in short or strongly curved traces") {
  const auto shorty =
      oracles::make_trace(0.0, 30.0, 1.0, [](double t) { return std::exp(-0.01 * t); });
  CHECK_THROWS_AS(fit_rate(shorty), no_plateau_error);

  // Gaussian-in-time decay has a linearly growing instantaneous rate
  const auto curved =
      oracles::make_trace(0.0, 100.0, 0.5, [](double t) { return std::exp(-0.001 * t * t); });
  CHECK_THROWS_AS(fit_rate(curved), no_plateau_error);
}

TEST_CASE("window search honours t_min") {
  const auto trace = oracles::make_trace(0.0, 1000.0, 1.0, [](double t) {
    return 0.9 * std::exp(-0.02 * t) + 0.1 * std::exp(-0.5 * t);
  });
  RateFitOptions opts;
  opts.t_min = 100.0;
  const RateFit fit = fit_rate(trace, opts);
  CHECK(fit.t1 >= 100.0);
}

TEST_CASE("slope fit input validation") {
  std::vector<std::pair<double, double>> two{{0.04, 1e-8}, {0.05, 1e-6}};
  CHECK_THROWS_AS(fit_slope(2.0, two), std::invalid_argument);

  std::vector<std::pair<double, double>> dup{{0.04, 1e-8}, {0.05, 1e-6}, {0.05, 2e-6}};
  CHECK_THROWS_AS(fit_slope(2.0, dup), std::invalid_argument);

  std::vector<std::pair<double, double>> nonpos{{0.04, 1e-8}, {0.05, 0.0}, {0.06, 1e-5}};
  CHECK_THROWS_AS(fit_slope(2.0, nonpos), std::domain_error);
}
