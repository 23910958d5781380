#include "cellshot/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cellshot/errors.hpp"
#include "cellshot/simple_s.hpp"
#include "cellshot/stats.hpp"

namespace cellshot {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::span<const double> as_span(const VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

std::span<const double> column_span(const MatrixXd& X, Index j) {
  return {X.col(j).data(), static_cast<std::size_t>(X.rows())};
}

struct LqqSpecs {
  RhoSpec s_stage;
  RhoSpec m_stage;
};

const LqqSpecs& lqq_init_specs() {
  static const LqqSpecs specs{tune_for_bdp(RhoKind::lqq, 0.5),
                              tune_for_efficiency(RhoKind::lqq, 0.95)};
  return specs;
}

} // namespace

ShootingConfig ShootingConfig::make(RhoKind kind, double bdp) {
  ShootingConfig config;
  config.spec = tune_for_bdp(kind, bdp);
  return config;
}

void ShootingConfig::validate() const {
  if (spec.constants.empty() || !(spec.delta > 0.0)) {
    throw ArgumentError("shooting config: rho spec is not initialised");
  }
  if (!(cutoff_c > 0.0) || !(eps1 > 0.0) || !(eps2_factor > 0.0) || !(eps3_factor > 0.0) ||
      !(eps4_factor > 0.0)) {
    throw ArgumentError("shooting config: tolerances and cutoff must be positive");
  }
  if (max_outer_loops < 1) {
    throw ArgumentError("shooting config: max_outer_loops must be at least 1");
  }
}

MatrixXd huberize_columns(const MatrixXd& X) {
  if (X.rows() < 2) {
    throw ArgumentError("huberize_columns needs at least two rows");
  }
  MatrixXd out(X.rows(), X.cols());
  for (Index j = 0; j < X.cols(); ++j) {
    const auto col = column_span(X, j);
    const double m = median(col);
    const double spread = mad(col);
    const double lo = m - 2.0 * spread;
    const double hi = m + 2.0 * spread;
    for (Index i = 0; i < X.rows(); ++i) {
      out(i, j) = std::max(lo, std::min(X(i, j), hi));
    }
  }
  return out;
}

InitialFit initial_fit(const MatrixXd& X0, const VectorXd& y, const FastSOptions& options,
                       std::uint64_t seed, const std::vector<std::string>& column_names) {
  std::string constant;
  for (Index j = 0; j < X0.cols(); ++j) {
    const auto col = X0.col(j);
    if (col.maxCoeff() == col.minCoeff()) {
      if (!constant.empty()) {
        constant += ", ";
      }
      constant += j < static_cast<Index>(column_names.size())
                      ? column_names[static_cast<std::size_t>(j)]
                      : "column " + std::to_string(j + 1);
    }
  }
  if (!constant.empty()) {
    throw InitializationError("Huberized design has constant columns: " + constant);
  }
  RegressionData huberized;
  huberized.X = X0;
  huberized.y = y;
  const LqqSpecs& specs = lqq_init_specs();
  try {
    const LinearFit mm = mm_fit(huberized, specs.s_stage, specs.m_stage, options, seed);
    return {mm.slopes, mm.intercept, mm.scale};
  } catch (const EstimationError& e) {
    throw InitializationError(std::string("initial MM fit failed: ") + e.what());
  }
}

VectorXd partial_response(const VectorXd& y, const MatrixXd& cleaned_prev,
                          const MatrixXd& cleaned_curr, const VectorXd& slopes_prev,
                          const VectorXd& slopes_curr, Index j) {
  VectorXd out = y;
  for (Index k = 0; k < j; ++k) {
    out.noalias() -= cleaned_curr.col(k) * slopes_curr(k);
  }
  for (Index k = j + 1; k < cleaned_prev.cols(); ++k) {
    out.noalias() -= cleaned_prev.col(k) * slopes_prev(k);
  }
  return out;
}

VectorXd impute_cells(const VectorXd& ytilde, double alpha, double beta, const VectorXd& x,
                      double eps3, SmallSlopeImputation fallback) {
  if (std::abs(beta) >= eps3) {
    return (ytilde.array() - alpha) / beta;
  }
  const double value =
      fallback == SmallSlopeImputation::column_median ? median(as_span(x)) : 0.0;
  return VectorXd::Constant(ytilde.size(), value);
}

VectorXd update_cell_weights(const VectorXd& residuals, double s,
                             const CellWeightFunction& weight) {
  if (!(s > 0.0)) {
    return VectorXd::Ones(residuals.size());
  }
  VectorXd w(residuals.size());
  for (Index i = 0; i < residuals.size(); ++i) {
    w(i) = weight(std::abs(residuals(i)) / s);
  }
  return w;
}

VectorXd update_cell_weights(const VectorXd& residuals, double s, double cutoff_c) {
  return update_cell_weights(residuals, s,
                             [cutoff_c](double r) { return hard_rejection_weight(r, cutoff_c); });
}

VectorXd clean_column(const VectorXd& x, const VectorXd& xhat, const VectorXd& w) {
  if (x.size() != xhat.size() || x.size() != w.size()) {
    throw ArgumentError("clean_column: length mismatch");
  }
  VectorXd out(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    out(i) = w(i) * x(i) + (1.0 - w(i)) * xhat(i);
  }
  return out;
}

ShootingFit shooting_fit(const RegressionData& data, const ShootingConfig& config) {
  validate(data);
  config.validate();
  const Index n = data.n();
  const Index p = data.p();
  if (n <= 2) {
    throw ArgumentError("shooting_fit needs more than two observations");
  }
  const double mad_y = mad(as_span(data.y));
  if (!(mad_y > 0.0)) {
    throw DegenerateResponseError("response has zero MAD");
  }
  const double eps2 = config.eps2_factor * mad_y;
  const double eps4 = config.eps4_factor * mad_y;
  VectorXd eps3(p);
  for (Index j = 0; j < p; ++j) {
    eps3(j) = config.eps3_factor * mad_y / mad(column_span(data.X, j));
  }
  const CellWeightFunction weight =
      config.cell_weight ? config.cell_weight : [c = config.cutoff_c](double r) {
        return hard_rejection_weight(r, c);
      };

  ShootingFit fit;
  const MatrixXd huberized = huberize_columns(data.X);
  fit.init = initial_fit(huberized, data.y, config.init_options, config.init_seed,
                         data.column_names);

  MatrixXd cleaned_prev = huberized;
  MatrixXd cleaned_curr = huberized;
  VectorXd slopes_prev = fit.init.slopes;
  VectorXd slopes_curr = fit.init.slopes;
  VectorXd scales_prev = VectorXd::Constant(p, fit.init.scale);
  VectorXd scales_curr = scales_prev;
  MatrixXd weights = MatrixXd::Ones(n, p);

  for (int loop = 1; loop <= config.max_outer_loops; ++loop) {
    for (Index j = 0; j < p; ++j) {
      const VectorXd ytilde =
          partial_response(data.y, cleaned_prev, cleaned_curr, slopes_prev, slopes_curr, j);
      const SimpleSFit simple =
          simple_s_fit(as_span(ytilde), column_span(data.X, j), config.spec, slopes_prev(j),
                       scales_prev(j), config.eps1, eps2);
      slopes_curr(j) = simple.slope;
      scales_curr(j) = simple.scale;
      const VectorXd xhat = impute_cells(ytilde, simple.intercept, simple.slope,
                                         data.X.col(j), eps3(j), config.small_slope);
      const Eigen::Map<const VectorXd> res(simple.residuals.data(), n);
      weights.col(j) = update_cell_weights(res, simple.scale, weight);
      cleaned_curr.col(j) = clean_column(data.X.col(j), xhat, weights.col(j));
    }
    const double change = (scales_curr - scales_prev).cwiseAbs().sum();
    fit.scale_change_trace.push_back(change);
    fit.outer_loops = loop;
    cleaned_prev = cleaned_curr;
    slopes_prev = slopes_curr;
    scales_prev = scales_curr;
    if (change < eps4) {
      fit.converged = true;
      break;
    }
  }

  fit.slopes = slopes_curr;
  fit.scales = scales_curr;
  fit.weights = std::move(weights);
  fit.cleaned_x = std::move(cleaned_curr);
  const VectorXd full_res = data.y - fit.cleaned_x * fit.slopes;
  fit.intercept = median(as_span(full_res));
  return fit;
}

OutlierFlags flag_outliers(const ShootingFit& fit, double threshold) {
  OutlierFlags flags;
  flags.cells = (fit.weights.array() < threshold).matrix();
  flags.rows.resize(static_cast<std::size_t>(fit.weights.rows()));
  for (Index i = 0; i < fit.weights.rows(); ++i) {
    flags.rows[static_cast<std::size_t>(i)] = flags.cells.row(i).all();
  }
  return flags;
}

} // namespace cellshot
