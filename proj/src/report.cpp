#include "cellshot/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "cellshot/errors.hpp"

namespace cellshot {

namespace {

using nlohmann::json;

std::string format_number(double v, const char* fmt) {
  if (std::isnan(v)) {
    return "NA";
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

json named_values(const std::vector<std::string>& names, const std::vector<double>& values) {
  json out = json::array();
  for (std::size_t j = 0; j < values.size(); ++j) {
    out.push_back({{"name", names.at(j)}, {"value", values[j]}});
  }
  return out;
}

std::vector<double> values_of(const json& arr, std::vector<std::string>* names) {
  std::vector<double> values;
  for (const auto& item : arr) {
    if (names != nullptr) {
      names->push_back(item.at("name").get<std::string>());
    }
    values.push_back(item.at("value").get<double>());
  }
  return values;
}

std::vector<std::string> names_of(const RegressionData& data) {
  return data.column_names.empty() ? default_column_names(data.p()) : data.column_names;
}

json cell_json(const ExperimentCell& cell) {
  json j = {{"estimator", std::string(to_string(cell.estimator))},
            {"eps", cell.eps},
            {"succeeded", cell.succeeded},
            {"failures", cell.failures}};
  if (std::isnan(cell.value)) {
    j["value"] = nullptr;
  } else {
    j["value"] = cell.value;
  }
  return j;
}

} // namespace

FitReport make_fit_report(const std::string& method, const RegressionData& data,
                          const ShootingFit& fit, double threshold, json config) {
  FitReport report;
  report.method = method;
  report.response = data.response_name;
  report.n = static_cast<int>(data.n());
  report.p = static_cast<int>(data.p());
  report.names = names_of(data);
  report.intercept = fit.intercept;
  report.slopes.assign(fit.slopes.begin(), fit.slopes.end());
  report.scales.assign(fit.scales.begin(), fit.scales.end());
  report.threshold = threshold;
  const OutlierFlags flags = flag_outliers(fit, threshold);
  for (Eigen::Index i = 0; i < fit.weights.rows(); ++i) {
    for (Eigen::Index j = 0; j < fit.weights.cols(); ++j) {
      if (flags.cells(i, j)) {
        report.flagged_cells.push_back(
            {static_cast<int>(i) + 1, report.names[static_cast<std::size_t>(j)], fit.weights(i, j)});
      }
    }
    if (flags.rows[static_cast<std::size_t>(i)]) {
      report.flagged_rows.push_back(static_cast<int>(i) + 1);
    }
  }
  report.convergence = Convergence{fit.outer_loops, fit.converged, fit.scale_change_trace};
  report.config = std::move(config);
  return report;
}

FitReport make_fit_report(const std::string& method, const RegressionData& data,
                          const LinearFit& fit, json config) {
  FitReport report;
  report.method = method;
  report.response = data.response_name;
  report.n = static_cast<int>(data.n());
  report.p = static_cast<int>(data.p());
  report.names = names_of(data);
  report.intercept = fit.intercept;
  report.slopes.assign(fit.slopes.begin(), fit.slopes.end());
  report.scale = fit.scale;
  report.config = std::move(config);
  return report;
}

json to_json(const FitReport& r) {
  json j;
  j["method"] = r.method;
  j["response"] = r.response;
  j["n"] = r.n;
  j["p"] = r.p;
  j["intercept"] = r.intercept;
  j["slopes"] = named_values(r.names, r.slopes);
  j["scale"] = r.scale ? json(*r.scale) : json(nullptr);
  j["scales"] = named_values(r.names, r.scales);
  j["threshold"] = r.threshold;
  json cells = json::array();
  for (const auto& c : r.flagged_cells) {
    cells.push_back({{"row", c.row}, {"column", c.column}, {"weight", c.weight}});
  }
  j["flagged_cells"] = cells;
  j["flagged_rows"] = r.flagged_rows;
  if (r.convergence) {
    j["convergence"] = {{"outer_loops", r.convergence->outer_loops},
                        {"converged", r.convergence->converged},
                        {"scale_change_trace", r.convergence->scale_change_trace}};
  } else {
    j["convergence"] = nullptr;
  }
  j["config"] = r.config;
  return j;
}

FitReport fit_report_from_json(const json& j) {
  try {
    FitReport r;
    r.method = j.at("method").get<std::string>();
    r.response = j.at("response").get<std::string>();
    r.n = j.at("n").get<int>();
    r.p = j.at("p").get<int>();
    r.intercept = j.at("intercept").get<double>();
    r.slopes = values_of(j.at("slopes"), &r.names);
    if (!j.at("scale").is_null()) {
      r.scale = j.at("scale").get<double>();
    }
    r.scales = values_of(j.at("scales"), nullptr);
    r.threshold = j.at("threshold").get<double>();
    for (const auto& c : j.at("flagged_cells")) {
      r.flagged_cells.push_back({c.at("row").get<int>(), c.at("column").get<std::string>(),
                                 c.at("weight").get<double>()});
    }
    r.flagged_rows = j.at("flagged_rows").get<std::vector<int>>();
    if (!j.at("convergence").is_null()) {
      const auto& c = j.at("convergence");
      r.convergence = Convergence{c.at("outer_loops").get<int>(), c.at("converged").get<bool>(),
                                  c.at("scale_change_trace").get<std::vector<double>>()};
    }
    r.config = j.at("config");
    return r;
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("malformed fit report: ") + e.what());
  }
}

json to_json(const ExperimentReport& report) {
  json j;
  j["metric"] = report.metric;
  j["study"] = report.study;
  j["scheme"] = report.scheme;
  j["replicates"] = report.replicates;
  j["seed"] = report.seed;
  j["n"] = report.n;
  j["p"] = report.p;
  j["eps_grid"] = report.eps_grid;
  json estimators = json::array();
  for (Estimator e : report.estimators) {
    estimators.push_back(std::string(to_string(e)));
  }
  j["estimators"] = estimators;
  json cells = json::array();
  for (const auto& cell : report.cells) {
    cells.push_back(cell_json(cell));
  }
  j["results"] = cells;
  j["replicate_seeds"] = report.replicate_seeds;
  return j;
}

std::string wide_table_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "estimator";
  for (double eps : report.eps_grid) {
    out << ",eps=" << format_number(eps, "%g");
  }
  out << '\n';
  for (Estimator e : report.estimators) {
    out << to_string(e);
    for (double eps : report.eps_grid) {
      out << ',' << format_number(report.at(e, eps).value, "%.4f");
    }
    out << '\n';
  }
  return out.str();
}

std::string tidy_table_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "estimator,eps,metric,value,succeeded,failures\n";
  for (const auto& cell : report.cells) {
    out << to_string(cell.estimator) << ',' << format_number(cell.eps, "%g") << ','
        << report.metric << ',' << format_number(cell.value, "%.10g") << ',' << cell.succeeded
        << ',' << cell.failures << '\n';
  }
  return out.str();
}

std::string and_table_csv(const std::vector<Estimator>& estimators,
                          const ExperimentReport* observed,
                          const ExperimentReport* contaminated) {
  std::ostringstream out;
  out << "estimator";
  if (observed != nullptr) {
    out << ",observed";
  }
  if (contaminated != nullptr) {
    out << ",contaminated";
  }
  out << '\n';
  for (Estimator e : estimators) {
    out << to_string(e);
    if (observed != nullptr) {
      out << ',' << format_number(observed->at(e, observed->eps_grid.front()).value, "%.4f");
    }
    if (contaminated != nullptr) {
      out << ','
          << format_number(contaminated->at(e, contaminated->eps_grid.front()).value, "%.4f");
    }
    out << '\n';
  }
  return out.str();
}

} // namespace cellshot
