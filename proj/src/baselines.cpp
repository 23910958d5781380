#include "cellshot/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cellshot/errors.hpp"
#include "cellshot/mscale.hpp"
#include "cellshot/rng.hpp"
#include "cellshot/stats.hpp"

namespace cellshot {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd with_intercept(const MatrixXd& X) {
  MatrixXd Z(X.rows(), X.cols() + 1);
  Z.col(0).setOnes();
  Z.rightCols(X.cols()) = X;
  return Z;
}

std::span<const double> as_span(const VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

LinearFit to_fit(const VectorXd& theta, double scale, LinearMethod method) {
  LinearFit fit;
  fit.intercept = theta(0);
  fit.slopes = theta.tail(theta.size() - 1);
  fit.scale = scale;
  fit.method = method;
  return fit;
}

// Weighted LS by normal equations; false when the weighted design is singular.
bool weighted_ls(const MatrixXd& Z, const VectorXd& y, const VectorXd& w, VectorXd& theta) {
  const MatrixXd Zw = Z.array().colwise() * w.array();
  const MatrixXd A = Zw.transpose() * Z;
  const VectorXd b = Zw.transpose() * y;
  Eigen::LDLT<MatrixXd> ldlt(A);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    return false;
  }
  const double dmax = ldlt.vectorD().cwiseAbs().maxCoeff();
  const double dmin = ldlt.vectorD().cwiseAbs().minCoeff();
  if (!(dmin > 1e-13 * dmax)) {
    return false;
  }
  theta = ldlt.solve(b);
  return theta.allFinite();
}

void irls_weights(const RhoSpec& spec, const VectorXd& r, double s, VectorXd& w) {
  for (Index i = 0; i < r.size(); ++i) {
    w(i) = irls_weight(spec, r(i) / s);
  }
}

// One fixed-point M-step from s.
double m_step(const RhoSpec& spec, const VectorXd& r, double s) {
  double total = 0.0;
  for (Index i = 0; i < r.size(); ++i) {
    total += rho_eval(spec, r(i) / s);
  }
  return s * std::sqrt(total / (spec.delta * static_cast<double>(r.size())));
}

double mean_rho_ratio(const RhoSpec& spec, const VectorXd& r, double s) {
  double total = 0.0;
  for (Index i = 0; i < r.size(); ++i) {
    total += rho_eval(spec, r(i) / s);
  }
  return total / (spec.delta * static_cast<double>(r.size()));
}

struct Candidate {
  VectorXd theta;
  double scale = std::numeric_limits<double>::infinity();
};

constexpr double kScaleEps = 1e-12;

} // namespace

std::string_view to_string(LinearMethod method) {
  switch (method) {
  case LinearMethod::ls:
    return "ls";
  case LinearMethod::s:
    return "s";
  case LinearMethod::mm:
    return "mm";
  }
  return "unknown";
}

LinearFit ls_fit(const RegressionData& data) {
  validate(data);
  const MatrixXd Z = with_intercept(data.X);
  Eigen::ColPivHouseholderQR<MatrixXd> qr(Z);
  qr.setThreshold(1e-10);
  if (qr.rank() < Z.cols()) {
    throw DegenerateDesignError("least squares: design with intercept is rank deficient");
  }
  const VectorXd theta = qr.solve(data.y);
  const VectorXd r = data.y - Z * theta;
  return to_fit(theta, std::sqrt(r.squaredNorm() / static_cast<double>(r.size())),
                LinearMethod::ls);
}

LinearFit s_fit(const RegressionData& data, const RhoSpec& rho, const FastSOptions& options,
                std::uint64_t seed) {
  validate(data);
  const Index n = data.n();
  const Index q = data.p() + 1;
  if (n <= q) {
    throw EstimationError("S-regression needs more observations than p + 1");
  }
  // sum rho / (n - q) = delta is the same equation with delta scaled by (n - q) / n
  RhoSpec spec = rho;
  if (options.dof_correction) {
    spec.delta *= static_cast<double>(n - q) / static_cast<double>(n);
  }
  const MatrixXd Z = with_intercept(data.X);
  const VectorXd& y = data.y;
  Rng rng(seed);

  std::vector<Candidate> best;
  VectorXd theta(q);
  VectorXd r(n);
  VectorXd w(n);
  MatrixXd Zs(q, q);
  VectorXd ys(q);
  int usable = 0;
  const int max_attempts = 20 * options.n_subsamples + 100;
  int attempts = 0;

  while (usable < options.n_subsamples && attempts < max_attempts) {
    ++attempts;
    const auto idx = sample_without_replacement(rng, static_cast<std::size_t>(n),
                                                static_cast<std::size_t>(q));
    for (Index i = 0; i < q; ++i) {
      Zs.row(i) = Z.row(static_cast<Index>(idx[static_cast<std::size_t>(i)]));
      ys(i) = y(static_cast<Index>(idx[static_cast<std::size_t>(i)]));
    }
    Eigen::FullPivLU<MatrixXd> lu(Zs);
    lu.setThreshold(1e-10);
    if (!lu.isInvertible()) {
      continue;
    }
    ++usable;
    theta = lu.solve(ys);
    r = y - Z * theta;
    double s = initial_scale(as_span(r));
    if (s <= kScaleEps * (1.0 + y.cwiseAbs().maxCoeff())) {
      // the elemental fit passes through more than half the data
      return to_fit(theta, 0.0, LinearMethod::s);
    }
    bool ok = true;
    for (int k = 0; k < options.k_refine; ++k) {
      s = m_step(spec, r, s);
      irls_weights(spec, r, s, w);
      if (!weighted_ls(Z, y, w, theta)) {
        ok = false;
        break;
      }
      r = y - Z * theta;
    }
    if (!ok) {
      continue;
    }
    const bool full = static_cast<int>(best.size()) >= options.best_r;
    if (full && mean_rho_ratio(spec, r, best.back().scale) >= 1.0) {
      continue;
    }
    const ScaleSolution sol = solve_mscale(as_span(r), spec, s, 1e-10);
    if (full && sol.s >= best.back().scale) {
      continue;
    }
    Candidate cand{theta, sol.s};
    auto pos = std::upper_bound(best.begin(), best.end(), cand.scale,
                                [](double v, const Candidate& c) { return v < c.scale; });
    best.insert(pos, std::move(cand));
    if (static_cast<int>(best.size()) > options.best_r) {
      best.pop_back();
    }
  }
  if (best.empty()) {
    throw EstimationError("S-regression: no non-degenerate elemental subsets found");
  }

  Candidate winner;
  for (const Candidate& start : best) {
    VectorXd th = start.theta;
    r = y - Z * th;
    double s = start.scale;
    for (int step = 0; step < options.max_refine_steps; ++step) {
      if (s <= 0.0) {
        break;
      }
      irls_weights(spec, r, s, w);
      VectorXd next = th;
      if (!weighted_ls(Z, y, w, next)) {
        break;
      }
      const double change = (next - th).norm();
      th = next;
      r = y - Z * th;
      s = m_step(spec, r, s);
      if (change <= options.refine_tol * (1.0 + th.norm())) {
        break;
      }
    }
    const ScaleSolution sol = solve_mscale(as_span(r), spec, s, 1e-12);
    if (sol.s < winner.scale) {
      winner = Candidate{th, sol.s};
    }
  }
  return to_fit(winner.theta, winner.scale, LinearMethod::s);
}

LinearFit s_fit(const RegressionData& data, const RhoSpec& spec, int n_subsamples, int k_refine,
                std::uint64_t seed) {
  FastSOptions options;
  options.n_subsamples = n_subsamples;
  options.k_refine = k_refine;
  return s_fit(data, spec, options, seed);
}

LinearFit mm_fit(const RegressionData& data, const RhoSpec& s_spec, const RhoSpec& m_spec,
                 const FastSOptions& options, std::uint64_t seed) {
  const LinearFit s_stage = s_fit(data, s_spec, options, seed);
  if (s_stage.scale <= 0.0) {
    LinearFit fit = s_stage;
    fit.method = LinearMethod::mm;
    return fit;
  }
  const MatrixXd Z = with_intercept(data.X);
  const VectorXd& y = data.y;
  VectorXd theta(Z.cols());
  theta(0) = s_stage.intercept;
  theta.tail(Z.cols() - 1) = s_stage.slopes;
  VectorXd r = y - Z * theta;
  VectorXd w(y.size());
  const double s = s_stage.scale;
  for (int step = 0; step < options.max_refine_steps; ++step) {
    irls_weights(m_spec, r, s, w);
    VectorXd next = theta;
    if (!weighted_ls(Z, y, w, next)) {
      break;
    }
    const VectorXd next_r = y - Z * next;
    const double change = (next_r - r).cwiseAbs().maxCoeff();
    theta = next;
    r = next_r;
    if (change <= 1e-10 * s) {
      break;
    }
  }
  return to_fit(theta, s, LinearMethod::mm);
}

LinearFit mm_fit(const RegressionData& data, double bdp, double eff, std::uint64_t seed,
                 RhoKind kind) {
  const RhoSpec s_spec = tune_for_bdp(kind, bdp);
  const RhoSpec m_spec = tune_for_efficiency(kind, eff);
  return mm_fit(data, s_spec, m_spec, FastSOptions{}, seed);
}

} // namespace cellshot
