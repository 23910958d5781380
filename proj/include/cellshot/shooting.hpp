#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "cellshot/baselines.hpp"
#include "cellshot/data.hpp"
#include "cellshot/rho.hpp"

namespace cellshot {

/// What a cell is imputed to when its column slope is too small to invert.
enum class SmallSlopeImputation {
  column_median, ///< median of the observed column (the algorithmic rule)
  zero,          ///< 0, the alternative stated alongside the estimator's definition
};

/// Maps a scaled absolute residual |res| / s to a cell weight in [0, 1].
using CellWeightFunction = std::function<double(double)>;

struct ShootingConfig {
  RhoSpec spec;
  double cutoff_c = 3.0;
  double eps1 = 1e-6;
  /// eps2 = eps2_factor * MAD(y): I-step stop on the max residual change.
  double eps2_factor = 1e-6;
  /// eps3 = eps3_factor * MAD(y) / MAD(x_j): smallest slope that is inverted.
  double eps3_factor = 1e-4;
  /// eps4 = eps4_factor * MAD(y): outer stop on the summed scale change.
  double eps4_factor = 1e-2;
  int max_outer_loops = 50;
  SmallSlopeImputation small_slope = SmallSlopeImputation::column_median;
  /// Empty means hard rejection at cutoff_c.
  CellWeightFunction cell_weight;
  /// Seed and knobs of the subsampling inside the lqq MM initializer.
  std::uint64_t init_seed = 0;
  FastSOptions init_options;

  /// Shooting S with the given rho tuned to a breakdown point (0.20 by default).
  static ShootingConfig make(RhoKind kind, double bdp = 0.20);

  /// Throws ArgumentError on non-positive tolerances or cutoff.
  void validate() const;
};

struct InitialFit {
  Eigen::VectorXd slopes;
  double intercept = 0.0;
  double scale = 0.0;
};

struct ShootingFit {
  Eigen::VectorXd slopes;
  double intercept = 0.0;
  /// Per-variable residual scales sigma_j.
  Eigen::VectorXd scales;
  /// Cell weights w_ij (n x p).
  Eigen::MatrixXd weights;
  /// Cleaned design x~_ij = w_ij x_ij + (1 - w_ij) x^_ij.
  Eigen::MatrixXd cleaned_x;
  int outer_loops = 0;
  bool converged = false;
  InitialFit init;
  /// Summed absolute scale change after every outer loop.
  std::vector<double> scale_change_trace;
};

/// Clamps every column to [median - 2 MAD, median + 2 MAD].
Eigen::MatrixXd huberize_columns(const Eigen::MatrixXd& X);

/// lqq MM-regression of y on the Huberized design (50% breakdown, 95%
/// efficiency). Throws InitializationError naming constant columns.
InitialFit initial_fit(const Eigen::MatrixXd& X0, const Eigen::VectorXd& y,
                       const FastSOptions& options = {}, std::uint64_t seed = 0,
                       const std::vector<std::string>& column_names = {});

/// y_i - sum_{k<j} curr_ik b_k(curr) - sum_{k>j} prev_ik b_k(prev).
Eigen::VectorXd partial_response(const Eigen::VectorXd& y, const Eigen::MatrixXd& cleaned_prev,
                                 const Eigen::MatrixXd& cleaned_curr,
                                 const Eigen::VectorXd& slopes_prev,
                                 const Eigen::VectorXd& slopes_curr, Eigen::Index j);

/// (ytilde_i - alpha) / beta, or the fallback for every cell when |beta| < eps3.
Eigen::VectorXd impute_cells(const Eigen::VectorXd& ytilde, double alpha, double beta,
                             const Eigen::VectorXd& x, double eps3,
                             SmallSlopeImputation fallback = SmallSlopeImputation::column_median);

/// w(|res_i| / s). A zero scale (exact fit) flags nothing.
Eigen::VectorXd update_cell_weights(const Eigen::VectorXd& residuals, double s, double cutoff_c);
Eigen::VectorXd update_cell_weights(const Eigen::VectorXd& residuals, double s,
                                    const CellWeightFunction& weight);

Eigen::VectorXd clean_column(const Eigen::VectorXd& x, const Eigen::VectorXd& xhat,
                             const Eigen::VectorXd& w);

/// Shooting S-estimate: Huberized lqq-MM start, then Gauss-Seidel sweeps of
/// simple S-regressions of the partial responses on each raw column, with
/// cell weighting and calibration-based cleaning between coordinates.
ShootingFit shooting_fit(const RegressionData& data, const ShootingConfig& config);

struct OutlierFlags {
  /// n x p, true where the cell weight is below the threshold.
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> cells;
  /// True where every cell in the row is flagged.
  std::vector<bool> rows;
};

OutlierFlags flag_outliers(const ShootingFit& fit, double threshold = 0.5);

} // namespace cellshot
