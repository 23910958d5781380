#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cellshot/baselines.hpp"
#include "cellshot/cli.hpp"
#include "cellshot/errors.hpp"
#include "cellshot/mscale.hpp"
#include "cellshot/rho.hpp"
#include "cellshot/shooting.hpp"
#include "cellshot/simbench.hpp"

namespace py = pybind11;
using namespace cellshot;

namespace {

RegressionData make_data(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  RegressionData data;
  data.X = X;
  data.y = y;
  data.column_names = default_column_names(X.cols());
  return data;
}

py::dict fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::string& method,
             double bdp, double cutoff, std::uint64_t seed) {
  const RegressionData data = make_data(X, y);
  py::dict out;
  out["method"] = method;
  if (method == "shooting-bi" || method == "shooting-skh") {
    ShootingConfig config = ShootingConfig::make(
        method == "shooting-skh" ? RhoKind::skipped_huber : RhoKind::biweight, bdp);
    config.cutoff_c = cutoff;
    config.init_seed = seed;
    ShootingFit f;
    {
      py::gil_scoped_release release;
      f = shooting_fit(data, config);
    }
    out["slopes"] = f.slopes;
    out["intercept"] = f.intercept;
    out["scales"] = f.scales;
    out["weights"] = f.weights;
    out["cleaned_x"] = f.cleaned_x;
    out["outer_loops"] = f.outer_loops;
    out["converged"] = f.converged;
    return out;
  }
  LinearFit f;
  {
    py::gil_scoped_release release;
    if (method == "ls") {
      f = ls_fit(data);
    } else if (method == "s") {
      f = s_fit(data, tune_for_bdp(RhoKind::biweight, bdp), FastSOptions{}, seed);
    } else if (method == "mm") {
      f = mm_fit(data, 0.5, 0.95, seed);
    } else {
      throw ArgumentError("unknown method '" + method + "'");
    }
  }
  out["slopes"] = f.slopes;
  out["intercept"] = f.intercept;
  out["scale"] = f.scale;
  return out;
}

} // namespace

PYBIND11_MODULE(_cellshot, m) {
  m.doc() = "Shooting S-estimator for cellwise-contaminated regression";

  static py::exception<Error> base(m, "CellshotError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) {
        std::rethrow_exception(p);
      }
    } catch (const Error& e) {
      PyErr_SetString(base.ptr(), e.what());
    }
  });

  m.def(
      "calibrate",
      [](const std::string& rho, std::optional<double> bdp, std::optional<double> efficiency) {
        const RhoKind kind = parse_rho_kind(rho);
        if (bdp.has_value() == efficiency.has_value()) {
          throw ArgumentError("give exactly one of bdp or efficiency");
        }
        const RhoSpec spec = bdp ? tune_for_bdp(kind, *bdp) : tune_for_efficiency(kind, *efficiency);
        py::dict out;
        out["rho"] = std::string(to_string(kind));
        out["constants"] = spec.constants;
        out["delta"] = spec.delta;
        out["breakdown_point"] = spec.breakdown_point();
        out["efficiency"] = efficiency_normal(spec);
        return out;
      },
      py::arg("rho"), py::kw_only(), py::arg("bdp") = py::none(),
      py::arg("efficiency") = py::none(), "Tune a rho-function to a breakdown point or efficiency.");

  m.def(
      "mscale",
      [](const std::vector<double>& residuals, const std::string& rho, double bdp, double eps1) {
        const RhoSpec spec = tune_for_bdp(parse_rho_kind(rho), bdp);
        return solve_mscale(residuals, spec, initial_scale(residuals), eps1).s;
      },
      py::arg("residuals"), py::arg("rho") = "biweight", py::arg("bdp") = 0.2,
      py::arg("eps1") = 1e-6, "M-scale of a residual vector.");

  m.def("fit", &fit, py::arg("X"), py::arg("y"), py::arg("method") = "shooting-bi",
        py::arg("bdp") = 0.2, py::arg("cutoff") = 3.0, py::arg("seed") = 0,
        "Fit shooting S (shooting-bi, shooting-skh) or a baseline (ls, s, mm).");

  m.def(
      "diagnose",
      [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::string& method,
         double threshold) {
        ShootingConfig config = ShootingConfig::make(
            method == "shooting-skh" ? RhoKind::skipped_huber : RhoKind::biweight);
        const ShootingFit f = shooting_fit(make_data(X, y), config);
        const OutlierFlags flags = flag_outliers(f, threshold);
        py::dict out;
        out["cells"] = Eigen::MatrixXi(flags.cells.cast<int>());
        out["rows"] = flags.rows;
        out["weights"] = f.weights;
        return out;
      },
      py::arg("X"), py::arg("y"), py::arg("method") = "shooting-bi", py::arg("threshold") = 0.5,
      "Cell and whole-row outlier flags from a shooting fit.");

  m.def(
      "generate",
      [](int n, int p, bool correlated, std::uint64_t seed) {
        const RegressionData d = gen_clean(SimDesign::make(n, p, correlated), seed);
        return py::make_tuple(d.X, d.y);
      },
      py::arg("n") = 100, py::arg("p") = 15, py::arg("correlated") = false, py::arg("seed") = 0,
      "Clean draw from the simulation design.");

  m.def(
      "simulate",
      [](const std::string& table, const std::vector<double>& eps, int replicates,
         std::uint64_t seed, const std::string& scheme) {
        ExperimentReport r;
        {
          py::gil_scoped_release release;
          r = run_table(parse_table_id(table), parse_outlier_scheme(scheme), all_estimators(), eps,
                        replicates, seed, RunOptions{threads_from_env()});
        }
        py::dict out;
        for (const ExperimentCell& c : r.cells) {
          out[py::make_tuple(std::string(to_string(c.estimator)), c.eps)] = c.value;
        }
        return out;
      },
      py::arg("table"), py::arg("eps"), py::arg("replicates"), py::arg("seed"),
      py::arg("scheme") = "dense", "n*MSE table keyed by (estimator, eps).");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run the command-line tool in-process: (exit code, stdout, stderr).");
}
