#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cellshot {

enum class RhoKind { biweight, skipped_huber, lqq };

std::string_view to_string(RhoKind kind);
/// Accepts "biweight", "skipped-huber"/"skipped_huber" and "lqq".
RhoKind parse_rho_kind(std::string_view name);

/// A bounded rho-function with its tuning constants.
///
/// `constants` holds {k} for the biweight and skipped Huber, and {b, c, s}
/// for lqq (psi is the identity on [0, c], has two quadratic pieces after
/// that and vanishes beyond a + b + c). `delta` is E[rho(Z)] for a standard
/// normal Z and `rho_sup` is rho(infinity); delta / rho_sup is the breakdown
/// point of the associated S-estimator.
struct RhoSpec {
  RhoKind kind = RhoKind::biweight;
  std::vector<double> constants;
  double delta = 0.0;
  double rho_sup = 0.0;

  /// End of the region where rho is not yet constant.
  double support() const;
  double breakdown_point() const { return delta / rho_sup; }
};

/// Builds a spec and fills in delta and rho_sup. Throws ArgumentError on
/// non-positive constants (or s <= 1 for lqq).
RhoSpec make_rho(RhoKind kind, std::vector<double> constants);

double rho_eval(const RhoSpec& spec, double z);
double rho_prime(const RhoSpec& spec, double z);
/// rho'(z) / z, with the limit value 1 at z = 0.
double irls_weight(const RhoSpec& spec, double z);

/// delta = E[rho(Z)], Z ~ N(0, 1), by Gauss-Kronrod quadrature split at kinks.
double expected_rho_normal(const RhoSpec& spec);

/// Asymptotic efficiency of the M-regression estimator at the normal model,
/// (E[Z psi(Z)])^2 / E[psi(Z)^2]. E[Z psi] equals E[psi'] by Stein's identity,
/// which also covers the jump of the skipped Huber psi.
double efficiency_normal(const RhoSpec& spec);

/// lqq shape used throughout: b = 1.5 c and s = 1.5 (minimal slope -0.5).
inline constexpr double kLqqBOverC = 1.5;
inline constexpr double kLqqS = 1.5;

/// Solves delta(k) / rho_sup(k) = bdp for the scale constant by bisection.
/// For lqq the shape is held at the fixed ratios above and c is searched.
RhoSpec tune_for_bdp(RhoKind kind, double bdp);

/// Solves efficiency_normal(k) = eff by bisection.
RhoSpec tune_for_efficiency(RhoKind kind, double eff);

/// 1 if r <= c, 0 otherwise.
double hard_rejection_weight(double r, double c);

} // namespace cellshot
