#include "cellshot/mscale.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cellshot/errors.hpp"
#include "cellshot/stats.hpp"

namespace cellshot {

double initial_scale(std::span<const double> residuals) {
  if (residuals.empty()) {
    throw ArgumentError("initial_scale of an empty residual vector");
  }
  std::vector<double> abs_res(residuals.size());
  std::transform(residuals.begin(), residuals.end(), abs_res.begin(),
                 [](double r) { return std::abs(r); });
  return kMadConstant * median(abs_res);
}

ScaleSolution solve_mscale(std::span<const double> residuals, const RhoSpec& spec, double s0,
                           double eps1, int max_steps) {
  if (residuals.empty()) {
    throw ArgumentError("solve_mscale of an empty residual vector");
  }
  const bool all_zero =
      std::all_of(residuals.begin(), residuals.end(), [](double r) { return r == 0.0; });
  if (all_zero) {
    return {0.0, 0, true};
  }
  if (!(s0 > 0.0)) {
    double acc = 0.0;
    for (double r : residuals) {
      acc += std::abs(r);
    }
    s0 = kMadConstant * acc / static_cast<double>(residuals.size());
  }

  const double n_delta = spec.delta * static_cast<double>(residuals.size());
  double s = s0;
  for (int step = 1; step <= max_steps; ++step) {
    double total = 0.0;
    for (double r : residuals) {
      total += rho_eval(spec, r / s);
    }
    const double next = std::sqrt(s * s / n_delta * total);
    const bool done = std::abs(next / s - 1.0) < eps1;
    s = next;
    if (done) {
      return {s, step, true};
    }
  }
  return {s, max_steps, false};
}

} // namespace cellshot
