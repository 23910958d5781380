#include "cellshot/cli.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cellshot/baselines.hpp"
#include "cellshot/csv.hpp"
#include "cellshot/errors.hpp"
#include "cellshot/report.hpp"
#include "cellshot/shooting.hpp"
#include "cellshot/simbench.hpp"

namespace cellshot::cli {

namespace {

using nlohmann::json;

struct DataArgs {
  std::string path;
  std::string response;
};

struct FitArgs {
  DataArgs data;
  std::string method = "shooting-bi";
  std::optional<double> bdp;
  double efficiency = 0.95;
  double cutoff = 3.0;
  std::optional<std::uint64_t> seed;
  double threshold = 0.5;
  std::string out;
};

struct SimulateArgs {
  std::string table;
  std::string scheme = "dense";
  std::vector<double> eps{0.0, 0.01, 0.02, 0.05, 0.10};
  int replicates = 200;
  std::uint64_t seed = 0;
  std::vector<std::string> estimators;
  std::string out = "simulation";
};

struct BenchArgs {
  DataArgs data;
  std::string mode = "both";
  int replicates = 100;
  std::uint64_t seed = 0;
  double frac = 0.8;
  double eps = 0.05;
  double shift = 10.0;
  std::vector<std::string> estimators;
  std::string out = "bench";
};

struct CalibrateArgs {
  std::string rho;
  std::optional<double> bdp;
  std::optional<double> efficiency;
};

struct GenerateArgs {
  int n = 100;
  int p = 15;
  bool correlated = false;
  std::uint64_t seed = 0;
  std::string mode = "none";
  std::string scheme = "dense";
  double eps = 0.0;
  std::string out;
};

// Estimation problems map to exit code 3, everything about inputs to 2.
class InputError : public Error {
public:
  using Error::Error;
};

void add_data_options(CLI::App* cmd, DataArgs& args) {
  cmd->add_option("--data", args.path, "CSV file with a header row")->required();
  cmd->add_option("--response", args.response, "Name of the response column")->required();
}

RegressionData load(const DataArgs& args) {
  return to_regression_data(read_csv(args.path), args.response);
}

void write_text(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty() || path == "-") {
    fallback << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    throw InputError("cannot write '" + path + "'");
  }
  file << text;
}

std::vector<Estimator> parse_estimators(const std::vector<std::string>& names) {
  if (names.empty()) {
    return all_estimators();
  }
  std::vector<Estimator> out;
  for (const auto& name : names) {
    out.push_back(parse_estimator(name));
  }
  return out;
}

bool is_shooting(const std::string& method) {
  return method == "shooting-bi" || method == "shooting-skh";
}

RhoKind shooting_kind(const std::string& method) {
  return method == "shooting-skh" ? RhoKind::skipped_huber : RhoKind::biweight;
}

ShootingConfig shooting_config(const FitArgs& args) {
  ShootingConfig config = ShootingConfig::make(shooting_kind(args.method), args.bdp.value_or(0.20));
  config.cutoff_c = args.cutoff;
  config.init_seed = args.seed.value_or(0);
  return config;
}

json shooting_config_json(const ShootingConfig& config, double bdp) {
  return {{"rho", std::string(to_string(config.spec.kind))},
          {"constants", config.spec.constants},
          {"bdp", bdp},
          {"cutoff", config.cutoff_c},
          {"eps1", config.eps1},
          {"eps2_factor", config.eps2_factor},
          {"eps3_factor", config.eps3_factor},
          {"eps4_factor", config.eps4_factor},
          {"max_outer_loops", config.max_outer_loops},
          {"init_seed", config.init_seed}};
}

FitReport fit_report(const FitArgs& args) {
  const RegressionData data = load(args.data);
  if (is_shooting(args.method)) {
    const ShootingConfig config = shooting_config(args);
    const ShootingFit fit = shooting_fit(data, config);
    return make_fit_report(args.method, data, fit, args.threshold,
                           shooting_config_json(config, args.bdp.value_or(0.20)));
  }
  if (args.method == "ls") {
    return make_fit_report(args.method, data, ls_fit(data), json::object());
  }
  if (!args.seed) {
    throw InputError("--seed is required for method '" + args.method + "'");
  }
  if (args.method == "s") {
    const double bdp = args.bdp.value_or(0.20);
    const RhoSpec spec = tune_for_bdp(RhoKind::biweight, bdp);
    const FastSOptions options;
    json config = {{"rho", "biweight"},
                   {"constants", spec.constants},
                   {"bdp", bdp},
                   {"n_subsamples", options.n_subsamples},
                   {"k_refine", options.k_refine},
                   {"seed", *args.seed}};
    return make_fit_report(args.method, data, s_fit(data, spec, options, *args.seed),
                           std::move(config));
  }
  if (args.method == "mm") {
    const double bdp = args.bdp.value_or(0.50);
    json config = {{"rho", "biweight"},
                   {"bdp", bdp},
                   {"efficiency", args.efficiency},
                   {"seed", *args.seed}};
    return make_fit_report(args.method, data,
                           mm_fit(data, bdp, args.efficiency, *args.seed, RhoKind::biweight),
                           std::move(config));
  }
  throw InputError("unknown method '" + args.method + "'");
}

int cmd_fit(const FitArgs& args, std::ostream& out) {
  const FitReport report = fit_report(args);
  write_text(args.out, to_json(report).dump(2) + "\n", out);
  return kExitOk;
}

int cmd_diagnose(const FitArgs& args, std::ostream& out) {
  if (!is_shooting(args.method)) {
    throw InputError("diagnose needs a shooting method (shooting-bi or shooting-skh)");
  }
  const RegressionData data = load(args.data);
  const ShootingFit fit = shooting_fit(data, shooting_config(args));
  const OutlierFlags flags = flag_outliers(fit, args.threshold);
  std::ostringstream text;
  text << "row,column,weight\n";
  std::size_t n_cells = 0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index j = 0; j < data.p(); ++j) {
      if (flags.cells(i, j)) {
        ++n_cells;
        text << i + 1 << ',' << data.column_names[static_cast<std::size_t>(j)] << ','
             << fit.weights(i, j) << '\n';
      }
    }
  }
  std::vector<int> rows;
  for (std::size_t i = 0; i < flags.rows.size(); ++i) {
    if (flags.rows[i]) {
      rows.push_back(static_cast<int>(i) + 1);
    }
  }
  text << "# whole_rows:";
  for (int r : rows) {
    text << ' ' << r;
  }
  text << "\n# summary: flagged_cells=" << n_cells << " flagged_rows=" << rows.size()
       << " n=" << data.n() << " p=" << data.p() << " threshold=" << args.threshold << '\n';
  write_text(args.out, text.str(), out);
  return kExitOk;
}

int cmd_simulate(const SimulateArgs& args, std::ostream& out) {
  const TableId table = parse_table_id(args.table);
  const OutlierScheme scheme = parse_outlier_scheme(args.scheme);
  const ExperimentReport report =
      run_table(table, scheme, parse_estimators(args.estimators), args.eps, args.replicates,
                args.seed, RunOptions{threads_from_env()});
  const std::string wide = wide_table_csv(report);
  write_text(args.out + ".csv", wide, out);
  write_text(args.out + "_tidy.csv", tidy_table_csv(report), out);
  write_text(args.out + ".json", to_json(report).dump(2) + "\n", out);
  out << wide;
  return kExitOk;
}

int cmd_bench_real(const BenchArgs& args, std::ostream& out) {
  if (args.mode != "resample" && args.mode != "contaminate" && args.mode != "both") {
    throw InputError("--mode must be resample, contaminate or both");
  }
  const RegressionData data = load(args.data);
  const auto estimators = parse_estimators(args.estimators);
  const RunOptions options{threads_from_env()};
  std::optional<ExperimentReport> observed;
  std::optional<ExperimentReport> contaminated;
  if (args.mode != "contaminate") {
    observed = real_data_resample(data, args.replicates, args.frac, estimators, args.seed, options);
  }
  if (args.mode != "resample") {
    contaminated = real_data_contaminate(data, args.eps, args.shift, args.replicates, estimators,
                                         args.seed, options);
  }
  const std::string table = and_table_csv(estimators, observed ? &*observed : nullptr,
                                          contaminated ? &*contaminated : nullptr);
  json sidecar = {{"data", args.data.path}, {"response", args.data.response}};
  sidecar["observed"] = observed ? to_json(*observed) : json(nullptr);
  sidecar["contaminated"] = contaminated ? to_json(*contaminated) : json(nullptr);
  write_text(args.out + ".csv", table, out);
  write_text(args.out + ".json", sidecar.dump(2) + "\n", out);
  out << table;
  return kExitOk;
}

int cmd_calibrate(const CalibrateArgs& args, std::ostream& out) {
  const RhoKind kind = parse_rho_kind(args.rho);
  if (args.bdp.has_value() == args.efficiency.has_value()) {
    throw InputError("give exactly one of --bdp or --efficiency");
  }
  const RhoSpec spec = args.bdp ? tune_for_bdp(kind, *args.bdp)
                                : tune_for_efficiency(kind, *args.efficiency);
  json j = {{"rho", std::string(to_string(kind))},
            {"constants", spec.constants},
            {"k", kind == RhoKind::lqq ? spec.constants[1] : spec.constants[0]},
            {"delta", spec.delta},
            {"rho_sup", spec.rho_sup},
            {"breakdown_point", spec.breakdown_point()},
            {"efficiency", efficiency_normal(spec)}};
  if (args.bdp) {
    j["target"] = "bdp";
    j["bdp"] = *args.bdp;
  } else {
    j["target"] = "efficiency";
    j["target_efficiency"] = *args.efficiency;
  }
  out << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_generate(const GenerateArgs& args, std::ostream& out) {
  const SimDesign design = SimDesign::make(args.n, args.p, args.correlated);
  RegressionData data = gen_clean(design, derive_seed(args.seed, {0}));
  const std::uint64_t cont_seed = derive_seed(args.seed, {1});
  if (args.mode == "cellwise") {
    data = contaminate_cellwise(data, args.eps, parse_outlier_scheme(args.scheme), cont_seed);
  } else if (args.mode == "rowwise") {
    data = contaminate_rowwise(data, args.eps, parse_outlier_scheme(args.scheme),
                               design.cov_factor, cont_seed);
  } else if (args.mode == "vertical") {
    data = contaminate_vertical(design, data, args.eps, cont_seed);
  } else if (args.mode != "none") {
    throw InputError("--mode must be none, cellwise, rowwise or vertical");
  }
  std::ostringstream text;
  write_csv(text, data);
  write_text(args.out, text.str(), out);
  return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Shooting S-estimation for cellwise-contaminated regression data", "cellshot"};
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit an estimator and write a JSON report");
  add_data_options(fit, fit_args.data);
  fit->add_option("--method", fit_args.method, "Estimator")
      ->check(CLI::IsMember({"shooting-bi", "shooting-skh", "ls", "s", "mm"}));
  fit->add_option("--bdp", fit_args.bdp, "Breakdown point (0.20 shooting/S, 0.50 MM)");
  fit->add_option("--efficiency", fit_args.efficiency, "MM efficiency at the normal model");
  fit->add_option("--cutoff", fit_args.cutoff, "Hard-rejection cutoff for cell weights");
  fit->add_option("--seed", fit_args.seed, "Seed for subsampling (required for s and mm)");
  fit->add_option("--threshold", fit_args.threshold, "Weight below which a cell is flagged");
  fit->add_option("--out", fit_args.out, "Output file (default: standard output)");

  FitArgs diag_args;
  auto* diagnose = app.add_subcommand("diagnose", "List flagged cells and rows as CSV");
  add_data_options(diagnose, diag_args.data);
  diagnose->add_option("--method", diag_args.method, "Shooting variant")
      ->check(CLI::IsMember({"shooting-bi", "shooting-skh"}));
  diagnose->add_option("--bdp", diag_args.bdp, "Breakdown point of the simple regressions");
  diagnose->add_option("--cutoff", diag_args.cutoff, "Hard-rejection cutoff");
  diagnose->add_option("--seed", diag_args.seed, "Seed of the initializer's subsampling");
  diagnose->add_option("--threshold", diag_args.threshold, "Weight below which a cell is flagged");
  diagnose->add_option("--out", diag_args.out, "Output file (default: standard output)");

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Run a seeded n*MSE simulation table");
  simulate->add_option("--table", sim_args.table, "cell-uncorr, cell-corr, row-corr or vertical")
      ->required();
  simulate->add_option("--scheme", sim_args.scheme, "dense, scattered or wide");
  simulate->add_option("--eps", sim_args.eps, "Contamination levels")->delimiter(',');
  simulate->add_option("--replicates", sim_args.replicates, "Replicates per level");
  simulate->add_option("--seed", sim_args.seed, "Base seed")->required();
  simulate->add_option("--estimators", sim_args.estimators, "Subset of estimators")
      ->delimiter(',');
  simulate->add_option("--out", sim_args.out, "Output prefix for .csv, _tidy.csv and .json");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench-real", "Average norm distance on a real dataset");
  add_data_options(bench, bench_args.data);
  bench->add_option("--mode", bench_args.mode, "resample, contaminate or both");
  bench->add_option("--replicates", bench_args.replicates, "Replicates");
  bench->add_option("--seed", bench_args.seed, "Base seed")->required();
  bench->add_option("--frac", bench_args.frac, "Resampled fraction of rows");
  bench->add_option("--eps", bench_args.eps, "Fraction of contaminated cells");
  bench->add_option("--shift", bench_args.shift, "Outlier shift in column MADs");
  bench->add_option("--estimators", bench_args.estimators, "Subset of estimators")
      ->delimiter(',');
  bench->add_option("--out", bench_args.out, "Output prefix for .csv and .json");

  CalibrateArgs cal_args;
  auto* calibrate = app.add_subcommand("calibrate", "Tune a rho-function and print its constants");
  calibrate->add_option("--rho", cal_args.rho, "biweight, skipped-huber or lqq")->required();
  calibrate->add_option("--bdp", cal_args.bdp, "Target breakdown point");
  calibrate->add_option("--efficiency", cal_args.efficiency, "Target efficiency");

  GenerateArgs gen_args;
  auto* generate = app.add_subcommand("generate", "Write a synthetic regression dataset as CSV");
  generate->add_option("--n", gen_args.n, "Observations");
  generate->add_option("--p", gen_args.p, "Predictors");
  generate->add_flag("--correlated", gen_args.correlated, "Use 0.5^|i-j| predictor correlation");
  generate->add_option("--seed", gen_args.seed, "Seed")->required();
  generate->add_option("--mode", gen_args.mode, "none, cellwise, rowwise or vertical");
  generate->add_option("--scheme", gen_args.scheme, "dense, scattered or wide");
  generate->add_option("--eps", gen_args.eps, "Contamination fraction");
  generate->add_option("--out", gen_args.out, "Output file (default: standard output)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    if (fit->parsed()) {
      return cmd_fit(fit_args, out);
    }
    if (diagnose->parsed()) {
      return cmd_diagnose(diag_args, out);
    }
    if (simulate->parsed()) {
      return cmd_simulate(sim_args, out);
    }
    if (bench->parsed()) {
      return cmd_bench_real(bench_args, out);
    }
    if (calibrate->parsed()) {
      return cmd_calibrate(cal_args, out);
    }
    if (generate->parsed()) {
      return cmd_generate(gen_args, out);
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const IngestionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const CalibrationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const Error& e) {
    err << "estimation failed: " << e.what() << '\n';
    return kExitEstimation;
  }
  return kExitInput;
}

} // namespace cellshot::cli
