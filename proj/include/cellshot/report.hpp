#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cellshot/baselines.hpp"
#include "cellshot/shooting.hpp"
#include "cellshot/simbench.hpp"

namespace cellshot {

struct FlaggedCell {
  /// 1-based data row (the header is not counted).
  int row = 0;
  std::string column;
  double weight = 0.0;

  bool operator==(const FlaggedCell&) const = default;
};

struct Convergence {
  int outer_loops = 0;
  bool converged = false;
  std::vector<double> scale_change_trace;

  bool operator==(const Convergence&) const = default;
};

/// JSON report of one fit, as written by `cellshot fit`.
///
/// Schema:
///   method         string   shooting-bi | shooting-skh | ls | s | mm
///   response       string
///   n, p           integer
///   intercept      number
///   slopes         [{name, value}]
///   scale          number | null   residual scale of ls/s/mm
///   scales         [{name, value}] per-variable scales (shooting only)
///   threshold      number          weight threshold used for flags
///   flagged_cells  [{row, column, weight}]   row is 1-based
///   flagged_rows   [integer]       rows whose cells are all flagged
///   convergence    {outer_loops, converged, scale_change_trace} | null
///   config         object          echo of the estimator settings
struct FitReport {
  std::string method;
  std::string response;
  int n = 0;
  int p = 0;
  std::vector<std::string> names;
  double intercept = 0.0;
  std::vector<double> slopes;
  std::optional<double> scale;
  std::vector<double> scales;
  double threshold = 0.5;
  std::vector<FlaggedCell> flagged_cells;
  std::vector<int> flagged_rows;
  std::optional<Convergence> convergence;
  nlohmann::json config = nlohmann::json::object();

  bool operator==(const FitReport&) const = default;
};

FitReport make_fit_report(const std::string& method, const RegressionData& data,
                          const ShootingFit& fit, double threshold, nlohmann::json config);
FitReport make_fit_report(const std::string& method, const RegressionData& data,
                          const LinearFit& fit, nlohmann::json config);

nlohmann::json to_json(const FitReport& report);
FitReport fit_report_from_json(const nlohmann::json& j);

/// Sidecar with the study settings, seeds and failure counts.
nlohmann::json to_json(const ExperimentReport& report);

/// Rows are estimators and columns the contamination levels.
std::string wide_table_csv(const ExperimentReport& report);
/// One row per (estimator, eps): estimator,eps,metric,value,succeeded,failures.
std::string tidy_table_csv(const ExperimentReport& report);

/// Two-block AND table; either block may be absent.
std::string and_table_csv(const std::vector<Estimator>& estimators,
                          const ExperimentReport* observed,
                          const ExperimentReport* contaminated);

} // namespace cellshot
