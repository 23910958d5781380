#include <doctest.h>

#include <cmath>

#include "cellshot/baselines.hpp"
#include "cellshot/errors.hpp"
#include "cellshot/simbench.hpp"
#include "oracles.hpp"

using namespace cellshot;
using doctest::Approx;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

const RhoSpec& bi20() {
  static const RhoSpec spec = tune_for_bdp(RhoKind::biweight, 0.2);
  return spec;
}

} // namespace

TEST_CASE("ls_fit on three points") {
  RegressionData d;
  d.X = MatrixXd(3, 1);
  d.X << 0, 1, 2;
  d.y = VectorXd(3);
  d.y << 1, 3, 4;
  d.column_names = {"x"};
  const LinearFit fit = ls_fit(d);
  CHECK(fit.slopes(0) == Approx(1.5));
  CHECK(fit.intercept == Approx(7.0 / 6.0));
  // residuals -1/6, 1/3, -1/6
  CHECK(fit.scale == Approx(std::sqrt((1.0 / 36 + 1.0 / 9 + 1.0 / 36) / 3)));
}

TEST_CASE("ls_fit matches the normal equations") {
  const RegressionData d = gen_clean(SimDesign::make(60, 4, true), 8);
  const LinearFit fit = ls_fit(d);
  const VectorXd theta = oracle::normal_equations(d.X, d.y);
  CHECK(std::abs(fit.intercept - theta(0)) < 1e-10);
  CHECK((fit.slopes - theta.tail(4)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("ls_fit rejects collinear designs") {
  RegressionData d = gen_clean(SimDesign::make(30, 3, false), 9);
  d.X.col(2) = 2.0 * d.X.col(0);
  CHECK_THROWS_AS(ls_fit(d), DegenerateDesignError);
}

TEST_CASE("S and MM reproduce an exact fit") {
  RegressionData d = gen_clean(SimDesign::make(40, 3, false), 10);
  d.y = 1.0 + (d.X * VectorXd::LinSpaced(3, 0.5, 1.5)).array();
  const LinearFit s = s_fit(d, bi20(), 50, 2, 1);
  CHECK(std::abs(s.intercept - 1.0) < 1e-8);
  CHECK((s.slopes - VectorXd::LinSpaced(3, 0.5, 1.5)).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(s.scale < 1e-8);
}

TEST_CASE("S resists vertical outliers and MM keeps the S scale") {
  RegressionData d = gen_clean(SimDesign::make(100, 3, false), 11);
  const LinearFit ls_clean = ls_fit(d);
  for (int i = 0; i < 10; ++i) {
    d.y(i) += 50.0;
  }
  const LinearFit s = s_fit(d, bi20(), 200, 2, 3);
  CHECK((s.slopes - ls_clean.slopes).cwiseAbs().maxCoeff() < 0.25);
  CHECK(std::abs(s.intercept - ls_clean.intercept) < 0.3);
  const LinearFit mm = mm_fit(d, 0.5, 0.95, 3);
  CHECK((mm.slopes - ls_clean.slopes).cwiseAbs().maxCoeff() < 0.25);
  CHECK(mm.method == LinearMethod::mm);
  const LinearFit s50 = s_fit(d, tune_for_bdp(RhoKind::biweight, 0.5), 500, 2, 3);
  CHECK(mm.scale == Approx(s50.scale).epsilon(1e-12));
  const LinearFit ls = ls_fit(d);
  CHECK(std::abs(ls.intercept - ls_clean.intercept) > 3.0);
}

TEST_CASE("S is regression, scale and affine equivariant") {
  const RegressionData d = gen_clean(SimDesign::make(50, 3, false), 12);
  const LinearFit base = s_fit(d, bi20(), 100, 2, 5);

  RegressionData shifted = d;
  VectorXd g(3);
  g << 1.0, -2.0, 0.5;
  shifted.y += shifted.X * g;
  shifted.y.array() += 4.0;
  const LinearFit fs = s_fit(shifted, bi20(), 100, 2, 5);
  CHECK((fs.slopes - base.slopes - g).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(std::abs(fs.intercept - base.intercept - 4.0) < 1e-6);
  CHECK(fs.scale == Approx(base.scale).epsilon(1e-6));

  RegressionData scaled = d;
  scaled.y *= -2.0;
  const LinearFit fc = s_fit(scaled, bi20(), 100, 2, 5);
  CHECK((fc.slopes + 2.0 * base.slopes).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(fc.scale == Approx(2.0 * base.scale).epsilon(1e-6));
}

TEST_CASE("S scale solves the scale equation with the chosen divisor") {
  const RegressionData d = gen_clean(SimDesign::make(60, 4, false), 15);
  for (bool corrected : {true, false}) {
    FastSOptions options;
    options.dof_correction = corrected;
    const LinearFit fit = s_fit(d, bi20(), options, 9);
    const VectorXd r = d.y - d.X * fit.slopes - VectorXd::Constant(60, fit.intercept);
    long double acc = 0.0L;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      acc += rho_eval(bi20(), r(i) / fit.scale);
    }
    const double divisor = corrected ? 60.0 - 5.0 : 60.0;
    CHECK(static_cast<double>(acc) / divisor == Approx(bi20().delta).epsilon(1e-8));
  }
}

TEST_CASE("S is reproducible for a seed") {
  const RegressionData d = gen_clean(SimDesign::make(50, 4, true), 13);
  const LinearFit a = s_fit(d, bi20(), 100, 2, 42);
  const LinearFit b = s_fit(d, bi20(), 100, 2, 42);
  CHECK(a.slopes == b.slopes);
  CHECK(a.scale == b.scale);
}

TEST_CASE("S needs more rows than coefficients") {
  const RegressionData d = gen_clean(SimDesign::make(4, 3, false), 14);
  CHECK_THROWS_AS(s_fit(d, bi20(), 10, 2, 1), EstimationError);
}
