#pragma once

#include <span>
#include <vector>

#include "cellshot/rho.hpp"

namespace cellshot {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Weighted least squares of y on x with an intercept, via weighted means
/// and covariances. Throws DegenerateDesignError when the weighted variance
/// of x vanishes or the weights sum to zero.
LineFit weighted_ls_simple(std::span<const double> y, std::span<const double> x,
                           std::span<const double> w);

struct SimpleSFit {
  double slope = 0.0;
  double intercept = 0.0;
  double scale = 0.0;
  std::vector<double> residuals;
  int i_steps = 0;
  bool converged = false;
};

inline constexpr int kMaxISteps = 100;

/// Simple-regression S-estimate by IRLS.
///
/// Starts from residuals ytilde - x * beta_init centred by their median and
/// weights rho'(r/s)/(r/s) at s_init. Each I-step fits weighted LS, then
/// solves the M-scale on the new residuals (warm-started from the previous
/// I-step's scale, or 1.4826 * median|r| on the first). Stops when the
/// largest absolute residual change drops below eps2.
///
/// A non-positive s_init starts from unit weights.
SimpleSFit simple_s_fit(std::span<const double> ytilde, std::span<const double> x,
                        const RhoSpec& spec, double beta_init, double s_init, double eps1,
                        double eps2, int max_steps = kMaxISteps);

} // namespace cellshot
