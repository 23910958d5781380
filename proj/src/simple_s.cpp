#include "cellshot/simple_s.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cellshot/errors.hpp"
#include "cellshot/mscale.hpp"
#include "cellshot/stats.hpp"

namespace cellshot {

LineFit weighted_ls_simple(std::span<const double> y, std::span<const double> x,
                           std::span<const double> w) {
  if (y.size() != x.size() || y.size() != w.size()) {
    throw ArgumentError("weighted_ls_simple: length mismatch");
  }
  double sw = 0.0;
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  if (!(sw > 0.0)) {
    throw DegenerateDesignError("weighted_ls_simple: weights sum to zero");
  }
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxx = 0.0;
  double sxy = 0.0;
  double spread = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double dx = x[i] - mx;
    sxx += w[i] * dx * dx;
    sxy += w[i] * dx * (y[i] - my);
    spread = std::max(spread, std::abs(dx));
  }
  if (!(sxx > 64.0 * std::numeric_limits<double>::epsilon() * sw * spread * spread)) {
    throw DegenerateDesignError("weighted_ls_simple: predictor has no weighted spread");
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

namespace {

void fill_weights(const RhoSpec& spec, std::span<const double> res, double s,
                  std::vector<double>& w) {
  for (std::size_t i = 0; i < res.size(); ++i) {
    w[i] = irls_weight(spec, res[i] / s);
  }
}

} // namespace

SimpleSFit simple_s_fit(std::span<const double> ytilde, std::span<const double> x,
                        const RhoSpec& spec, double beta_init, double s_init, double eps1,
                        double eps2, int max_steps) {
  const std::size_t n = ytilde.size();
  if (x.size() != n) {
    throw ArgumentError("simple_s_fit: length mismatch");
  }
  if (n == 0) {
    throw ArgumentError("simple_s_fit: empty data");
  }

  SimpleSFit fit;
  std::vector<double> raw(n);
  for (std::size_t i = 0; i < n; ++i) {
    raw[i] = ytilde[i] - x[i] * beta_init;
  }
  const double centre = median(raw);
  fit.slope = beta_init;
  fit.intercept = centre;
  fit.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    fit.residuals[i] = raw[i] - centre;
  }
  if (std::all_of(fit.residuals.begin(), fit.residuals.end(),
                  [](double r) { return r == 0.0; })) {
    fit.converged = true;
    return fit;
  }

  std::vector<double> w(n, 1.0);
  if (s_init > 0.0) {
    fill_weights(spec, fit.residuals, s_init, w);
  }
  std::vector<double> next_res(n);
  double s = 0.0;
  for (int step = 1; step <= max_steps; ++step) {
    if (std::all_of(w.begin(), w.end(), [](double v) { return v == 0.0; })) {
      // every point rejected; keep the last iterate
      fit.converged = false;
      return fit;
    }
    const LineFit line = weighted_ls_simple(ytilde, x, w);
    double max_change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next_res[i] = ytilde[i] - x[i] * line.slope - line.intercept;
      max_change = std::max(max_change, std::abs(next_res[i] - fit.residuals[i]));
    }
    const double s0 = step == 1 ? initial_scale(next_res) : s;
    const ScaleSolution sol = solve_mscale(next_res, spec, s0, eps1);
    s = sol.s;

    fit.slope = line.slope;
    fit.intercept = line.intercept;
    fit.residuals.swap(next_res);
    fit.scale = s;
    fit.i_steps = step;

    if (s == 0.0) {
      fit.converged = true;
      return fit;
    }
    if (max_change < eps2) {
      fit.converged = true;
      return fit;
    }
    fill_weights(spec, fit.residuals, s, w);
  }
  fit.converged = false;
  return fit;
}

} // namespace cellshot
