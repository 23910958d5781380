#pragma once

#include <span>

#include "cellshot/rho.hpp"

namespace cellshot {

struct ScaleSolution {
  double s = 0.0;
  int m_steps = 0;
  bool converged = false;
};

inline constexpr int kMaxMSteps = 200;

/// 1.4826 * median |r|.
double initial_scale(std::span<const double> residuals);

/// M-scale by the fixed-point iteration
///   s_l = sqrt(s_{l-1}^2 / (delta n) * sum rho(r_i / s_{l-1}))
/// stopped once |s_l / s_{l-1} - 1| < eps1. All-zero residuals give s = 0.
/// A non-positive s0 falls back to 1.4826 * mean |r|.
ScaleSolution solve_mscale(std::span<const double> residuals, const RhoSpec& spec, double s0,
                           double eps1 = 1e-6, int max_steps = kMaxMSteps);

} // namespace cellshot
