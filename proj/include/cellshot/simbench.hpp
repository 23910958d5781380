#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cellshot/baselines.hpp"
#include "cellshot/data.hpp"
#include "cellshot/rng.hpp"
#include "cellshot/shooting.hpp"

namespace cellshot {

/// Synthetic regression design: x ~ N(0, cov), y = x'beta + e, e ~ N(0, sigma^2).
struct SimDesign {
  int n = 100;
  int p = 15;
  bool correlated = false;
  Eigen::VectorXd beta_true;
  double sigma_err = 0.5;
  Eigen::MatrixXd cov;
  /// Lower-triangular Cholesky factor of cov, fixed once for reproducible draws.
  Eigen::MatrixXd cov_factor;

  /// beta_j = j/p; identity covariance with sigma 0.5, or 0.5^|i-j| with sigma 0.81.
  static SimDesign make(int n = 100, int p = 15, bool correlated = false);

  double signal_to_noise() const;
};

enum class ContaminationMode { cellwise, rowwise, vertical };
/// dense N(50, 1), scattered N(0, 100^2), wide N(50, 10^2); rowwise variants
/// use the same means and scale the design covariance by the variance.
enum class OutlierScheme { dense, scattered, wide };

std::string_view to_string(ContaminationMode mode);
std::string_view to_string(OutlierScheme scheme);
OutlierScheme parse_outlier_scheme(std::string_view name);

struct ContaminationScheme {
  ContaminationMode mode = ContaminationMode::cellwise;
  double eps = 0.0;
  OutlierScheme scheme = OutlierScheme::dense;

  double outlier_mean() const;
  double outlier_sd() const;
};

/// round(eps * count), half away from zero.
std::size_t contamination_count(double eps, std::size_t count);

RegressionData gen_clean(const SimDesign& design, std::uint64_t seed);

/// Replaces round(eps n p) distinct cells of X by independent normal draws.
RegressionData contaminate_cellwise(const RegressionData& data, double eps, OutlierScheme scheme,
                                    std::uint64_t seed);
/// Replaces round(eps n) rows of X by draws from N(mean 1, sd^2 cov).
RegressionData contaminate_rowwise(const RegressionData& data, double eps, OutlierScheme scheme,
                                   const Eigen::MatrixXd& cov_factor, std::uint64_t seed);
/// Rebuilds y_i = x_i'beta + e, e ~ N(50, sigma^2), for round(eps n) rows.
RegressionData contaminate_vertical(const SimDesign& design, const RegressionData& data,
                                    double eps, std::uint64_t seed);

/// n * (1/p) sum_j (1/R) sum_r (b_j^(r) - beta_j)^2.
double n_mse(const std::vector<Eigen::VectorXd>& estimates, const Eigen::VectorXd& beta_true,
             int n);

/// Average norm distance of replicate estimates to a full-data estimate,
/// each coefficient scaled by MAD(x_j) / MAD(y).
double and_metric(const std::vector<Eigen::VectorXd>& estimates,
                  const Eigen::VectorXd& beta_full, const Eigen::MatrixXd& X,
                  const Eigen::VectorXd& y);

enum class Estimator { ls, s, mm, shooting_bi, shooting_skh };

std::string_view to_string(Estimator estimator);
Estimator parse_estimator(std::string_view name);
const std::vector<Estimator>& all_estimators();

/// The five estimators with the simulation study's tuning: S with the
/// 20%-breakdown biweight, MM with 50% breakdown and 95% efficiency
/// biweight, shooting S with the 20%-breakdown biweight or skipped Huber.
class EstimatorSuite {
public:
  EstimatorSuite();

  /// Slope estimates. `seed` drives S/MM subsampling; shooting is
  /// deterministic given its own fixed initializer seed.
  Eigen::VectorXd slopes(Estimator estimator, const RegressionData& data,
                         std::uint64_t seed) const;

  const RhoSpec& s_spec() const { return s_spec_; }
  const ShootingConfig& shooting_config(Estimator estimator) const;

  FastSOptions fast_s;

private:
  RhoSpec s_spec_;
  RhoSpec mm_s_spec_;
  RhoSpec mm_m_spec_;
  ShootingConfig shooting_bi_;
  ShootingConfig shooting_skh_;
};

enum class TableId { cell_uncorr, cell_corr, row_corr, vertical_corr };

std::string_view to_string(TableId table);
/// Accepts "cell-uncorr", "cell-corr", "row-corr", "vertical" (and the
/// underscore spellings).
TableId parse_table_id(std::string_view name);

struct ExperimentCell {
  Estimator estimator = Estimator::ls;
  double eps = 0.0;
  double value = 0.0;
  int succeeded = 0;
  int failures = 0;
};

struct ExperimentReport {
  /// "n_mse" or "and".
  std::string metric;
  /// Table id for simulations, "resample" or "contaminate" for real data.
  std::string study;
  std::string scheme;
  std::vector<Estimator> estimators;
  std::vector<double> eps_grid;
  /// One entry per (estimator, eps) pair, estimator-major.
  std::vector<ExperimentCell> cells;
  int replicates = 0;
  std::uint64_t seed = 0;
  int n = 0;
  int p = 0;
  /// Per-replicate derived seeds, one per replicate.
  std::vector<std::uint64_t> replicate_seeds;

  const ExperimentCell& at(Estimator estimator, double eps) const;
};

struct RunOptions {
  int threads = 1;
};

ExperimentReport run_table(TableId table, OutlierScheme scheme,
                           const std::vector<Estimator>& estimators,
                           const std::vector<double>& eps_grid, int replicates,
                           std::uint64_t seed, const RunOptions& options = {},
                           const EstimatorSuite& suite = EstimatorSuite{});

ExperimentReport real_data_resample(const RegressionData& data, int replicates, double frac,
                                    const std::vector<Estimator>& estimators, std::uint64_t seed,
                                    const RunOptions& options = {},
                                    const EstimatorSuite& suite = EstimatorSuite{});

ExperimentReport real_data_contaminate(const RegressionData& data, double eps, double shift,
                                       int replicates, const std::vector<Estimator>& estimators,
                                       std::uint64_t seed, const RunOptions& options = {},
                                       const EstimatorSuite& suite = EstimatorSuite{});

/// Thread count from CELLSHOT_THREADS (1 when unset or invalid).
int threads_from_env();

} // namespace cellshot
