#include "cellshot/simbench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "cellshot/errors.hpp"
#include "cellshot/stats.hpp"

namespace cellshot {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs body(i) for i in [0, count). Results must be written by index so the
// outcome does not depend on scheduling.
template <class Body>
void parallel_for(int count, int threads, Body&& body) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) {
      body(i);
    }
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) {
            error = std::current_exception();
          }
        }
      }
    });
  }
  for (auto& th : pool) {
    th.join();
  }
  if (error) {
    std::rethrow_exception(error);
  }
}

std::span<const double> as_span(const VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

const RhoSpec& cached_spec(RhoKind kind, double bdp) {
  static const RhoSpec bi20 = tune_for_bdp(RhoKind::biweight, 0.20);
  static const RhoSpec skh20 = tune_for_bdp(RhoKind::skipped_huber, 0.20);
  static const RhoSpec bi50 = tune_for_bdp(RhoKind::biweight, 0.50);
  if (kind == RhoKind::biweight && bdp == 0.20) {
    return bi20;
  }
  if (kind == RhoKind::skipped_huber && bdp == 0.20) {
    return skh20;
  }
  return bi50;
}

const RhoSpec& biweight_95() {
  static const RhoSpec spec = tune_for_efficiency(RhoKind::biweight, 0.95);
  return spec;
}

// Per-replicate squared errors or norm distances, NaN marking a failed fit.
ExperimentCell summarize(Estimator estimator, double eps, const std::vector<double>& values,
                         double scale) {
  ExperimentCell cell;
  cell.estimator = estimator;
  cell.eps = eps;
  CompensatedSum acc;
  for (double v : values) {
    if (std::isnan(v)) {
      ++cell.failures;
    } else {
      acc.add(v);
      ++cell.succeeded;
    }
  }
  cell.value = cell.succeeded > 0 ? scale * acc.value() / cell.succeeded : kNaN;
  return cell;
}

VectorXd mad_ratios(const MatrixXd& X, const VectorXd& y) {
  const double mad_y = mad(as_span(y));
  if (!(mad_y > 0.0)) {
    throw DegenerateResponseError("AND metric: response has zero MAD");
  }
  VectorXd ratios(X.cols());
  for (Index j = 0; j < X.cols(); ++j) {
    const VectorXd col = X.col(j);
    const double m = mad(as_span(col));
    if (!(m > 0.0)) {
      throw DegenerateDesignError("AND metric: column " + std::to_string(j + 1) +
                                  " has zero MAD");
    }
    ratios(j) = m / mad_y;
  }
  return ratios;
}

double norm_distance(const VectorXd& estimate, const VectorXd& full, const VectorXd& ratios) {
  const VectorXd scaled = (estimate - full).cwiseProduct(ratios);
  return std::sqrt(scaled.squaredNorm() / static_cast<double>(scaled.size()));
}

double squared_error_mean(const VectorXd& estimate, const VectorXd& truth) {
  return (estimate - truth).squaredNorm() / static_cast<double>(truth.size());
}

constexpr std::uint64_t kFitStream = 0xF17;

} // namespace

SimDesign SimDesign::make(int n, int p, bool correlated) {
  if (n < 1 || p < 1) {
    throw ArgumentError("design needs n >= 1 and p >= 1");
  }
  SimDesign d;
  d.n = n;
  d.p = p;
  d.correlated = correlated;
  d.beta_true.resize(p);
  for (int j = 0; j < p; ++j) {
    d.beta_true(j) = static_cast<double>(j + 1) / p;
  }
  d.cov = MatrixXd::Identity(p, p);
  if (correlated) {
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < p; ++j) {
        d.cov(i, j) = std::pow(0.5, std::abs(i - j));
      }
    }
  }
  d.sigma_err = correlated ? 0.81 : 0.5;
  d.cov_factor = d.cov.llt().matrixL();
  return d;
}

double SimDesign::signal_to_noise() const {
  return std::sqrt(beta_true.dot(cov * beta_true)) / sigma_err;
}

std::string_view to_string(ContaminationMode mode) {
  switch (mode) {
  case ContaminationMode::cellwise:
    return "cellwise";
  case ContaminationMode::rowwise:
    return "rowwise";
  case ContaminationMode::vertical:
    return "vertical";
  }
  return "unknown";
}

std::string_view to_string(OutlierScheme scheme) {
  switch (scheme) {
  case OutlierScheme::dense:
    return "dense";
  case OutlierScheme::scattered:
    return "scattered";
  case OutlierScheme::wide:
    return "wide";
  }
  return "unknown";
}

OutlierScheme parse_outlier_scheme(std::string_view name) {
  if (name == "dense") {
    return OutlierScheme::dense;
  }
  if (name == "scattered") {
    return OutlierScheme::scattered;
  }
  if (name == "wide") {
    return OutlierScheme::wide;
  }
  throw ArgumentError("unknown outlier scheme '" + std::string(name) + "'");
}

double ContaminationScheme::outlier_mean() const {
  if (mode == ContaminationMode::vertical) {
    return 50.0;
  }
  return scheme == OutlierScheme::scattered ? 0.0 : 50.0;
}

double ContaminationScheme::outlier_sd() const {
  switch (scheme) {
  case OutlierScheme::dense:
    return 1.0;
  case OutlierScheme::scattered:
    return 100.0;
  case OutlierScheme::wide:
    return 10.0;
  }
  return 1.0;
}

std::size_t contamination_count(double eps, std::size_t count) {
  if (!(eps >= 0.0 && eps < 1.0)) {
    throw ArgumentError("contamination fraction must lie in [0, 1)");
  }
  return static_cast<std::size_t>(std::lround(eps * static_cast<double>(count)));
}

RegressionData gen_clean(const SimDesign& design, std::uint64_t seed) {
  Rng rng(seed);
  RegressionData data;
  data.X.resize(design.n, design.p);
  data.y.resize(design.n);
  VectorXd z(design.p);
  for (int i = 0; i < design.n; ++i) {
    for (int j = 0; j < design.p; ++j) {
      z(j) = draw_normal(rng);
    }
    data.X.row(i) = (design.cov_factor * z).transpose();
  }
  for (int i = 0; i < design.n; ++i) {
    const double e = design.sigma_err > 0.0 ? draw_normal(rng, 0.0, design.sigma_err) : 0.0;
    data.y(i) = data.X.row(i).dot(design.beta_true) + e;
  }
  data.column_names = default_column_names(design.p);
  return data;
}

RegressionData contaminate_cellwise(const RegressionData& data, double eps, OutlierScheme scheme,
                                    std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(data.n());
  const auto p = static_cast<std::size_t>(data.p());
  const std::size_t count = contamination_count(eps, n * p);
  RegressionData out = data;
  if (count == 0) {
    return out;
  }
  const ContaminationScheme cs{ContaminationMode::cellwise, eps, scheme};
  Rng rng(seed);
  const auto cells = sample_without_replacement(rng, n * p, count);
  for (std::size_t cell : cells) {
    const auto i = static_cast<Index>(cell / p);
    const auto j = static_cast<Index>(cell % p);
    out.X(i, j) = draw_normal(rng, cs.outlier_mean(), cs.outlier_sd());
  }
  return out;
}

RegressionData contaminate_rowwise(const RegressionData& data, double eps, OutlierScheme scheme,
                                   const MatrixXd& cov_factor, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(data.n());
  const std::size_t count = contamination_count(eps, n);
  RegressionData out = data;
  if (count == 0) {
    return out;
  }
  if (cov_factor.rows() != data.p() || cov_factor.cols() != data.p()) {
    throw ArgumentError("rowwise contamination: covariance factor has the wrong shape");
  }
  const ContaminationScheme cs{ContaminationMode::rowwise, eps, scheme};
  Rng rng(seed);
  const auto rows = sample_without_replacement(rng, n, count);
  VectorXd z(data.p());
  for (std::size_t row : rows) {
    for (Index j = 0; j < data.p(); ++j) {
      z(j) = draw_normal(rng);
    }
    const VectorXd draw =
        (cov_factor * z).array() * cs.outlier_sd() + cs.outlier_mean();
    out.X.row(static_cast<Index>(row)) = draw.transpose();
  }
  return out;
}

RegressionData contaminate_vertical(const SimDesign& design, const RegressionData& data,
                                    double eps, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(data.n());
  const std::size_t count = contamination_count(eps, n);
  RegressionData out = data;
  if (count == 0) {
    return out;
  }
  Rng rng(seed);
  const auto rows = sample_without_replacement(rng, n, count);
  for (std::size_t row : rows) {
    const auto i = static_cast<Index>(row);
    out.y(i) = data.X.row(i).dot(design.beta_true) + draw_normal(rng, 50.0, design.sigma_err);
  }
  return out;
}

double n_mse(const std::vector<VectorXd>& estimates, const VectorXd& beta_true, int n) {
  if (estimates.empty()) {
    throw ArgumentError("n_mse needs at least one estimate");
  }
  CompensatedSum acc;
  for (const VectorXd& est : estimates) {
    if (est.size() != beta_true.size()) {
      throw ArgumentError("n_mse: estimate length differs from the true coefficients");
    }
    acc.add(squared_error_mean(est, beta_true));
  }
  return static_cast<double>(n) * acc.value() / static_cast<double>(estimates.size());
}

double and_metric(const std::vector<VectorXd>& estimates, const VectorXd& beta_full,
                  const MatrixXd& X, const VectorXd& y) {
  if (estimates.empty()) {
    throw ArgumentError("and_metric needs at least one estimate");
  }
  const VectorXd ratios = mad_ratios(X, y);
  CompensatedSum acc;
  for (const VectorXd& est : estimates) {
    if (est.size() != beta_full.size()) {
      throw ArgumentError("and_metric: estimate length differs from the full-data estimate");
    }
    acc.add(norm_distance(est, beta_full, ratios));
  }
  return acc.value() / static_cast<double>(estimates.size());
}

std::string_view to_string(Estimator estimator) {
  switch (estimator) {
  case Estimator::ls:
    return "ls";
  case Estimator::s:
    return "s";
  case Estimator::mm:
    return "mm";
  case Estimator::shooting_bi:
    return "shooting-bi";
  case Estimator::shooting_skh:
    return "shooting-skh";
  }
  return "unknown";
}

Estimator parse_estimator(std::string_view name) {
  for (Estimator e : all_estimators()) {
    if (name == to_string(e)) {
      return e;
    }
  }
  if (name == "shooting_bi") {
    return Estimator::shooting_bi;
  }
  if (name == "shooting_skh") {
    return Estimator::shooting_skh;
  }
  throw ArgumentError("unknown estimator '" + std::string(name) + "'");
}

const std::vector<Estimator>& all_estimators() {
  static const std::vector<Estimator> all{Estimator::ls, Estimator::s, Estimator::mm,
                                          Estimator::shooting_bi, Estimator::shooting_skh};
  return all;
}

EstimatorSuite::EstimatorSuite()
    : s_spec_(cached_spec(RhoKind::biweight, 0.20)),
      mm_s_spec_(cached_spec(RhoKind::biweight, 0.50)), mm_m_spec_(biweight_95()) {
  shooting_bi_.spec = cached_spec(RhoKind::biweight, 0.20);
  shooting_skh_.spec = cached_spec(RhoKind::skipped_huber, 0.20);
}

const ShootingConfig& EstimatorSuite::shooting_config(Estimator estimator) const {
  return estimator == Estimator::shooting_skh ? shooting_skh_ : shooting_bi_;
}

VectorXd EstimatorSuite::slopes(Estimator estimator, const RegressionData& data,
                                std::uint64_t seed) const {
  switch (estimator) {
  case Estimator::ls:
    return ls_fit(data).slopes;
  case Estimator::s:
    return s_fit(data, s_spec_, fast_s, seed).slopes;
  case Estimator::mm:
    return mm_fit(data, mm_s_spec_, mm_m_spec_, fast_s, seed).slopes;
  case Estimator::shooting_bi:
    return shooting_fit(data, shooting_bi_).slopes;
  case Estimator::shooting_skh:
    return shooting_fit(data, shooting_skh_).slopes;
  }
  return {};
}

std::string_view to_string(TableId table) {
  switch (table) {
  case TableId::cell_uncorr:
    return "cell-uncorr";
  case TableId::cell_corr:
    return "cell-corr";
  case TableId::row_corr:
    return "row-corr";
  case TableId::vertical_corr:
    return "vertical";
  }
  return "unknown";
}

TableId parse_table_id(std::string_view name) {
  if (name == "cell-uncorr" || name == "cell_uncorr") {
    return TableId::cell_uncorr;
  }
  if (name == "cell-corr" || name == "cell_corr") {
    return TableId::cell_corr;
  }
  if (name == "row-corr" || name == "row_corr") {
    return TableId::row_corr;
  }
  if (name == "vertical" || name == "vertical-corr" || name == "vertical_corr") {
    return TableId::vertical_corr;
  }
  throw ArgumentError("unknown table id '" + std::string(name) + "'");
}

const ExperimentCell& ExperimentReport::at(Estimator estimator, double eps) const {
  for (const ExperimentCell& cell : cells) {
    if (cell.estimator == estimator && cell.eps == eps) {
      return cell;
    }
  }
  throw ArgumentError("report has no entry for " + std::string(to_string(estimator)));
}

ExperimentReport run_table(TableId table, OutlierScheme scheme,
                           const std::vector<Estimator>& estimators,
                           const std::vector<double>& eps_grid, int replicates,
                           std::uint64_t seed, const RunOptions& options,
                           const EstimatorSuite& suite) {
  if (replicates < 1) {
    throw ArgumentError("run_table needs at least one replicate");
  }
  if (estimators.empty() || eps_grid.empty()) {
    throw ArgumentError("run_table needs estimators and contamination levels");
  }
  for (double eps : eps_grid) {
    contamination_count(eps, 1); // range check
  }
  const bool correlated = table != TableId::cell_uncorr;
  const SimDesign design = SimDesign::make(100, 15, correlated);

  ExperimentReport report;
  report.metric = "n_mse";
  report.study = std::string(to_string(table));
  report.scheme = table == TableId::vertical_corr ? "vertical" : std::string(to_string(scheme));
  report.estimators = estimators;
  report.eps_grid = eps_grid;
  report.replicates = replicates;
  report.seed = seed;
  report.n = design.n;
  report.p = design.p;
  for (int r = 0; r < replicates; ++r) {
    report.replicate_seeds.push_back(derive_seed(seed, {static_cast<std::uint64_t>(r)}));
  }

  const std::size_t n_est = estimators.size();
  const std::size_t n_eps = eps_grid.size();
  // errors[(e * n_est + k) * R + r]
  std::vector<double> errors(n_eps * n_est * static_cast<std::size_t>(replicates), kNaN);

  parallel_for(replicates, options.threads, [&](int r) {
    const std::uint64_t rep_seed = report.replicate_seeds[static_cast<std::size_t>(r)];
    const RegressionData clean = gen_clean(design, rep_seed);
    for (std::size_t e = 0; e < n_eps; ++e) {
      const double eps = eps_grid[e];
      const std::uint64_t cont_seed = derive_seed(rep_seed, {e + 1});
      RegressionData data;
      switch (table) {
      case TableId::cell_uncorr:
      case TableId::cell_corr:
        data = contaminate_cellwise(clean, eps, scheme, cont_seed);
        break;
      case TableId::row_corr:
        data = contaminate_rowwise(clean, eps, scheme, design.cov_factor, cont_seed);
        break;
      case TableId::vertical_corr:
        data = contaminate_vertical(design, clean, eps, cont_seed);
        break;
      }
      const std::uint64_t fit_seed = derive_seed(rep_seed, {kFitStream, e});
      for (std::size_t k = 0; k < n_est; ++k) {
        double value = kNaN;
        try {
          value = squared_error_mean(suite.slopes(estimators[k], data, fit_seed),
                                     design.beta_true);
        } catch (const Error&) {
          // recorded as a failure
        }
        errors[(e * n_est + k) * static_cast<std::size_t>(replicates) +
               static_cast<std::size_t>(r)] = value;
      }
    }
  });

  for (std::size_t k = 0; k < n_est; ++k) {
    for (std::size_t e = 0; e < n_eps; ++e) {
      const auto begin = errors.begin() + static_cast<std::ptrdiff_t>(
                                              (e * n_est + k) * static_cast<std::size_t>(replicates));
      const std::vector<double> values(begin, begin + replicates);
      report.cells.push_back(summarize(estimators[k], eps_grid[e], values, design.n));
    }
  }
  return report;
}

namespace {

struct FullFits {
  std::vector<VectorXd> slopes;
};

FullFits fit_full(const RegressionData& data, const std::vector<Estimator>& estimators,
                  const EstimatorSuite& suite, std::uint64_t fit_seed) {
  FullFits full;
  for (Estimator e : estimators) {
    full.slopes.push_back(suite.slopes(e, data, fit_seed));
  }
  return full;
}

ExperimentReport real_data_report(const RegressionData& data, const char* study, double eps,
                                  const std::vector<Estimator>& estimators, int replicates,
                                  std::uint64_t seed) {
  ExperimentReport report;
  report.metric = "and";
  report.study = study;
  report.scheme = "observed";
  report.estimators = estimators;
  report.eps_grid = {eps};
  report.replicates = replicates;
  report.seed = seed;
  report.n = static_cast<int>(data.n());
  report.p = static_cast<int>(data.p());
  for (int r = 0; r < replicates; ++r) {
    report.replicate_seeds.push_back(derive_seed(seed, {static_cast<std::uint64_t>(r)}));
  }
  return report;
}

template <class MakeReplicate>
void run_real_replicates(ExperimentReport& report, const RegressionData& data,
                         const EstimatorSuite& suite, const RunOptions& options,
                         MakeReplicate&& make_replicate) {
  validate(data);
  const VectorXd ratios = mad_ratios(data.X, data.y);
  const std::uint64_t fit_seed = derive_seed(report.seed, {kFitStream});
  const FullFits full = fit_full(data, report.estimators, suite, fit_seed);
  const std::size_t n_est = report.estimators.size();
  const auto R = static_cast<std::size_t>(report.replicates);
  std::vector<double> dist(n_est * R, kNaN);

  parallel_for(report.replicates, options.threads, [&](int r) {
    const RegressionData rep = make_replicate(report.replicate_seeds[static_cast<std::size_t>(r)]);
    for (std::size_t k = 0; k < n_est; ++k) {
      double value = kNaN;
      try {
        value = norm_distance(suite.slopes(report.estimators[k], rep, fit_seed),
                              full.slopes[k], ratios);
      } catch (const Error&) {
      }
      dist[k * R + static_cast<std::size_t>(r)] = value;
    }
  });

  for (std::size_t k = 0; k < n_est; ++k) {
    const auto begin = dist.begin() + static_cast<std::ptrdiff_t>(k * R);
    const std::vector<double> values(begin, begin + static_cast<std::ptrdiff_t>(R));
    report.cells.push_back(summarize(report.estimators[k], report.eps_grid.front(), values, 1.0));
  }
}

} // namespace

ExperimentReport real_data_resample(const RegressionData& data, int replicates, double frac,
                                    const std::vector<Estimator>& estimators, std::uint64_t seed,
                                    const RunOptions& options, const EstimatorSuite& suite) {
  if (replicates < 1 || estimators.empty()) {
    throw ArgumentError("resampling needs replicates and estimators");
  }
  if (!(frac > 0.0 && frac <= 1.0)) {
    throw ArgumentError("resampling fraction must lie in (0, 1]");
  }
  const auto n = static_cast<std::size_t>(data.n());
  const auto m = static_cast<std::size_t>(std::lround(frac * static_cast<double>(n)));
  if (m <= static_cast<std::size_t>(data.p()) + 1) {
    throw ArgumentError("resampled subsets would have too few rows for p + 1 coefficients");
  }
  ExperimentReport report = real_data_report(data, "resample", 0.0, estimators, replicates, seed);
  run_real_replicates(report, data, suite, options, [&](std::uint64_t rep_seed) {
    Rng rng(rep_seed);
    auto picked = sample_without_replacement(rng, n, m);
    std::sort(picked.begin(), picked.end());
    std::vector<Index> rows(picked.begin(), picked.end());
    return subset_rows(data, rows);
  });
  return report;
}

ExperimentReport real_data_contaminate(const RegressionData& data, double eps, double shift,
                                       int replicates, const std::vector<Estimator>& estimators,
                                       std::uint64_t seed, const RunOptions& options,
                                       const EstimatorSuite& suite) {
  if (replicates < 1 || estimators.empty()) {
    throw ArgumentError("contamination study needs replicates and estimators");
  }
  const auto n = static_cast<std::size_t>(data.n());
  const auto p = static_cast<std::size_t>(data.p());
  const std::size_t count = contamination_count(eps, n * p);
  VectorXd centre(data.p());
  VectorXd spread(data.p());
  for (Index j = 0; j < data.p(); ++j) {
    const VectorXd col = data.X.col(j);
    centre(j) = median(as_span(col));
    spread(j) = mad(as_span(col));
  }
  ExperimentReport report =
      real_data_report(data, "contaminate", eps, estimators, replicates, seed);
  report.scheme = "contaminated";
  run_real_replicates(report, data, suite, options, [&](std::uint64_t rep_seed) {
    RegressionData rep = data;
    if (count == 0) {
      return rep;
    }
    Rng rng(rep_seed);
    const auto cells = sample_without_replacement(rng, n * p, count);
    for (std::size_t cell : cells) {
      const auto i = static_cast<Index>(cell / p);
      const auto j = static_cast<Index>(cell % p);
      rep.X(i, j) = draw_normal(rng, centre(j) + shift * spread(j), spread(j));
    }
    return rep;
  });
  return report;
}

int threads_from_env() {
  const char* raw = std::getenv("CELLSHOT_THREADS");
  if (raw == nullptr) {
    return 1;
  }
  char* end = nullptr;
  const long v = std::strtol(raw, &end, 10);
  if (end == raw || *end != '\0' || v < 1) {
    return 1;
  }
  return static_cast<int>(std::min<long>(v, 256));
}

} // namespace cellshot
