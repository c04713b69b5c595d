#include "fise/rates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fise/errors.hpp"
#include "fise/prop.hpp"

namespace fise {

double survival_probability(const WaveFunction& psi, double x_c) {
  const auto& grid = *psi.grid;
  if (!(x_c > 0.0) || !(x_c < grid.L))
    throw config_error("survival_probability: requires 0 < x_c < L");
  double acc = 0.0;
  for (size_t j = 0; j < psi.amplitudes.size(); ++j)
    if (std::fabs(grid.x_nodes[j]) <= x_c) acc += std::norm(psi.amplitudes[j]);
  return acc * grid.dx;
}

std::vector<std::pair<double, double>> instantaneous_rate(const DecayTrace& trace) {
  const size_t n = trace.times.size();
  if (n < 3 || trace.Pb.size() != n)
    throw std::domain_error("instantaneous_rate: need at least 3 samples");
  std::vector<double> ln_pb(n);
  for (size_t i = 0; i < n; ++i) {
    if (!(trace.Pb[i] > 0.0))
      throw std::domain_error("instantaneous_rate: P_b must be positive, sample " +
                              std::to_string(i));
    ln_pb[i] = std::log(trace.Pb[i]);
  }
  std::vector<std::pair<double, double>> out(n);
  out.front() = {trace.times.front(),
                 -(ln_pb[1] - ln_pb[0]) / (trace.times[1] - trace.times[0])};
  for (size_t i = 1; i + 1 < n; ++i)
    out[i] = {trace.times[i],
              -(ln_pb[i + 1] - ln_pb[i - 1]) / (trace.times[i + 1] - trace.times[i - 1])};
  out.back() = {trace.times[n - 1],
                -(ln_pb[n - 1] - ln_pb[n - 2]) / (trace.times[n - 1] - trace.times[n - 2])};
  return out;
}

namespace {

struct LinFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
};

LinFit least_squares(std::span<const double> x, std::span<const double> y) {
  const size_t n = x.size();
  double sx = 0.0, sy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / static_cast<double>(n);
  const double my = sy / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  LinFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy > 0.0) {
    double ss_res = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double r = y[i] - (fit.intercept + fit.slope * x[i]);
      ss_res += r * r;
    }
    fit.r_squared = std::max(0.0, 1.0 - ss_res / syy);
  } else {
    fit.r_squared = 1.0;  // zero-variance data: the constant line is exact
  }
  return fit;
}

double median_of_sorted(const std::vector<double>& v) {
  const size_t n = v.size();
  return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

RateFit fit_rate(const DecayTrace& trace, const RateFitOptions& opts) {
  const auto ginst_full = instantaneous_rate(trace);

  // Restrict to t >= t_min.
  size_t first = 0;
  while (first < trace.times.size() && trace.times[first] < opts.t_min) ++first;
  const size_t n_avail = trace.times.size() - first;
  if (n_avail < 3 || trace.times.back() - trace.times[first] < opts.min_window)
    throw no_plateau_error("fit_rate: trace covers less than min_window beyond t_min");

  // Window search runs on a decimated copy so the quadratic scan stays cheap;
  // the regression below uses every sample inside the chosen window.
  const size_t dec = std::max<size_t>(1, n_avail / static_cast<size_t>(opts.max_search_samples));
  std::vector<size_t> idx;
  for (size_t i = first; i < trace.times.size(); i += dec) idx.push_back(i);
  if (idx.back() != trace.times.size() - 1) idx.push_back(trace.times.size() - 1);

  const size_t m = idx.size();
  std::vector<double> td(m), gd(m);
  {
    DecayTrace dtrace;
    dtrace.x_c = trace.x_c;
    for (size_t i = 0; i < m; ++i) {
      dtrace.times.push_back(trace.times[idx[i]]);
      dtrace.Pb.push_back(trace.Pb[idx[i]]);
    }
    const auto gi = instantaneous_rate(dtrace);
    for (size_t i = 0; i < m; ++i) {
      td[i] = gi[i].first;
      gd[i] = gi[i].second;
    }
  }

  // Longest [i1, i2] with span >= min_window whose Gamma_inst values all stay
  // within plateau_tolerance of the window median.
  long best_i1 = -1, best_i2 = -1;
  double best_span = -1.0;
  std::vector<double> window;
  for (size_t i1 = 0; i1 + 1 < m; ++i1) {
    if (td.back() - td[i1] < std::max(best_span, opts.min_window)) break;
    window.clear();
    window.push_back(gd[i1]);
    for (size_t i2 = i1 + 1; i2 < m; ++i2) {
      // insert gd[i2] keeping the window sorted
      window.insert(std::upper_bound(window.begin(), window.end(), gd[i2]), gd[i2]);
      const double span = td[i2] - td[i1];
      if (span < opts.min_window) continue;
      const double med = median_of_sorted(window);
      const double lo = window.front(), hi = window.back();
      bool ok;
      if (med > 0.0)
        ok = (hi - med <= opts.plateau_tolerance * med) &&
             (med - lo <= opts.plateau_tolerance * med);
      else
        // No measurable decay in the window: accept only if everything sits
        // at the numerical floor.
        ok = std::max(std::fabs(lo), std::fabs(hi)) <= opts.rate_floor;
      if (ok && span > best_span) {
        best_span = span;
        best_i1 = static_cast<long>(i1);
        best_i2 = static_cast<long>(i2);
      }
    }
  }

  if (best_i1 < 0)
    throw no_plateau_error(
        "fit_rate: no window of length >= " + std::to_string(opts.min_window) +
        " with Gamma_inst within " + std::to_string(opts.plateau_tolerance) +
        " of its median (field too weak for T_total, or over-the-barrier dynamics)");

  const double t1 = td[static_cast<size_t>(best_i1)];
  const double t2 = td[static_cast<size_t>(best_i2)];

  std::vector<double> ts, ln_pb;
  for (size_t i = first; i < trace.times.size(); ++i) {
    if (trace.times[i] < t1 || trace.times[i] > t2) continue;
    ts.push_back(trace.times[i]);
    ln_pb.push_back(std::log(trace.Pb[i]));
  }
  const LinFit fit = least_squares(ts, ln_pb);

  RateFit res;
  res.gamma = -fit.slope;
  res.t1 = t1;
  res.t2 = t2;
  res.P0 = std::exp(fit.intercept);
  res.r_squared = fit.r_squared;
  res.gamma_inst = ginst_full;
  res.below_floor = res.gamma < opts.rate_floor;
  return res;
}

SlopeFit fit_slope(double alpha, std::span<const std::pair<double, double>> points) {
  if (points.size() < 3)
    throw std::invalid_argument("fit_slope: need at least 3 (F0, gamma) points");
  std::vector<double> inv_f, y;
  for (const auto& [f0, gamma] : points) {
    if (!(gamma > 0.0)) throw std::domain_error("fit_slope: all gamma must be positive");
    inv_f.push_back(1.0 / f0);
    y.push_back(-std::log(gamma));
  }
  for (size_t i = 0; i < points.size(); ++i)
    for (size_t j = i + 1; j < points.size(); ++j)
      if (points[i].first == points[j].first)
        throw std::invalid_argument("fit_slope: duplicate F0 = " +
                                    std::to_string(points[i].first));

  const LinFit fit = least_squares(inv_f, y);
  SlopeFit res;
  res.alpha = alpha;
  res.points.assign(points.begin(), points.end());
  res.m_alpha = fit.slope;
  res.intercept = fit.intercept;
  res.r_squared = fit.r_squared;
  return res;
}

}  // namespace fise
