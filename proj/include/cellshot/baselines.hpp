#pragma once

#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

#include "cellshot/data.hpp"
#include "cellshot/rho.hpp"

namespace cellshot {

enum class LinearMethod { ls, s, mm };

std::string_view to_string(LinearMethod method);

struct LinearFit {
  Eigen::VectorXd slopes;
  double intercept = 0.0;
  /// LS: root mean square residual. S and MM: the M-scale of the S stage.
  double scale = 0.0;
  LinearMethod method = LinearMethod::ls;
};

/// Knobs of the fast-S subsampling search.
struct FastSOptions {
  int n_subsamples = 500;
  int k_refine = 2;
  int best_r = 5;
  int max_refine_steps = 500;
  double refine_tol = 1e-9;
  /// Solve sum rho(r_i / s) / (n - p - 1) = delta instead of dividing by n,
  /// which offsets the downward bias of the minimised scale in small samples.
  bool dof_correction = true;
};

LinearFit ls_fit(const RegressionData& data);

/// Fast-S regression estimate: elemental (p+1)-point starts, a few IRLS
/// refinements each, full refinement of the best_r candidates by M-scale.
LinearFit s_fit(const RegressionData& data, const RhoSpec& spec, const FastSOptions& options,
                std::uint64_t seed);
LinearFit s_fit(const RegressionData& data, const RhoSpec& spec, int n_subsamples, int k_refine,
                std::uint64_t seed);

/// MM: S stage with `s_spec`, then IRLS M-regression with `m_spec` at the
/// fixed S scale, started from the S coefficients.
LinearFit mm_fit(const RegressionData& data, const RhoSpec& s_spec, const RhoSpec& m_spec,
                 const FastSOptions& options, std::uint64_t seed);
/// Tunes both stages for the given breakdown point and efficiency.
LinearFit mm_fit(const RegressionData& data, double bdp, double eff, std::uint64_t seed,
                 RhoKind kind = RhoKind::biweight);

} // namespace cellshot
