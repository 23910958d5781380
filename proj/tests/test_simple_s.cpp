#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "cellshot/errors.hpp"
#include "cellshot/simple_s.hpp"
#include "oracles.hpp"

using namespace cellshot;
using doctest::Approx;

namespace {

struct Line {
  std::vector<double> y;
  std::vector<double> x;
};

Line noisy_line(std::uint64_t seed, int n, double a, double b, double sd) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Line l;
  for (int i = 0; i < n; ++i) {
    const double x = 2.0 * z(gen);
    l.x.push_back(x);
    l.y.push_back(a + b * x + sd * z(gen));
  }
  return l;
}

const RhoSpec& bi20() {
  static const RhoSpec spec = tune_for_bdp(RhoKind::biweight, 0.2);
  return spec;
}

} // namespace

TEST_CASE("weighted_ls_simple with unit weights matches the sums formula") {
  const Line l = noisy_line(3, 25, 1.5, -0.7, 0.4);
  const std::vector<double> w(l.x.size(), 1.0);
  const LineFit fit = weighted_ls_simple(l.y, l.x, w);
  const auto [slope, intercept] = oracle::simple_ls(l.y, l.x);
  CHECK(fit.slope == Approx(slope).epsilon(1e-12));
  CHECK(fit.intercept == Approx(intercept).epsilon(1e-12));
}

TEST_CASE("weighted_ls_simple with 0/1 weights equals LS on the kept points") {
  const Line l = noisy_line(4, 30, 0.0, 2.0, 1.0);
  std::vector<double> w(l.x.size(), 1.0);
  Line kept;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i % 4 == 0) {
      w[i] = 0.0;
    } else {
      kept.x.push_back(l.x[i]);
      kept.y.push_back(l.y[i]);
    }
  }
  const LineFit fit = weighted_ls_simple(l.y, l.x, w);
  const auto [slope, intercept] = oracle::simple_ls(kept.y, kept.x);
  CHECK(fit.slope == Approx(slope).epsilon(1e-12));
  CHECK(fit.intercept == Approx(intercept).epsilon(1e-12));
}

TEST_CASE("weighted_ls_simple degeneracies") {
  const std::vector<double> y{1, 2, 3};
  CHECK_THROWS_AS(weighted_ls_simple(y, std::vector<double>{5, 5, 5}, std::vector<double>{1, 1, 1}),
                  DegenerateDesignError);
  CHECK_THROWS_AS(weighted_ls_simple(y, std::vector<double>{1, 2, 3}, std::vector<double>{0, 0, 0}),
                  DegenerateDesignError);
  CHECK_THROWS_AS(weighted_ls_simple(y, std::vector<double>{1, 2}, std::vector<double>{1, 1}),
                  ArgumentError);
  // a shift of x far from zero does not trigger the degeneracy check
  const LineFit shifted =
      weighted_ls_simple(y, std::vector<double>{1e6 + 1, 1e6 + 2, 1e6 + 3}, std::vector<double>{1, 1, 1});
  CHECK(shifted.slope == Approx(1.0).epsilon(1e-9));
}

TEST_CASE("exact line gives zero scale") {
  std::vector<double> x, y;
  for (int i = 0; i < 12; ++i) {
    x.push_back(i - 3.5);
    y.push_back(2.0 + 0.75 * (i - 3.5));
  }
  const SimpleSFit fit = simple_s_fit(y, x, bi20(), 0.0, -1.0, 1e-6, 1e-9);
  CHECK(fit.converged);
  CHECK(fit.scale == Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(fit.slope == Approx(0.75).epsilon(1e-12));
  CHECK(fit.intercept == Approx(2.0).epsilon(1e-12));

  // starting at the true slope returns immediately
  const SimpleSFit start = simple_s_fit(y, x, bi20(), 0.75, 1.0, 1e-6, 1e-9);
  CHECK(start.i_steps == 0);
  CHECK(start.intercept == Approx(2.0));
}

TEST_CASE("outlying responses do not move the S line") {
  Line l = noisy_line(5, 60, 1.0, 3.0, 0.5);
  const Line clean = l;
  for (std::size_t i = 0; i < 8; ++i) {
    l.y[i] += 60.0;
  }
  const auto [ls_slope, ls_int] = oracle::simple_ls(clean.y, clean.x);
  const auto [contaminated_slope, unused] = oracle::simple_ls(l.y, l.x);
  const SimpleSFit fit = simple_s_fit(l.y, l.x, bi20(), contaminated_slope, -1.0, 1e-6, 1e-9);
  CHECK(fit.converged);
  CHECK(std::abs(fit.slope - ls_slope) < 0.05 * std::abs(ls_slope));
  CHECK(std::abs(fit.intercept - ls_int) < 0.2);
  CHECK(fit.scale < 1.0);
}

TEST_CASE("affine equivariance of the simple S-fit") {
  const Line l = noisy_line(6, 40, -1.0, 0.5, 0.3);
  const double eps2 = 1e-12;
  const SimpleSFit base = simple_s_fit(l.y, l.x, bi20(), 0.0, -1.0, 1e-12, eps2);
  REQUIRE(base.converged);

  std::vector<double> y2(l.y);
  for (std::size_t i = 0; i < y2.size(); ++i) {
    y2[i] = 4.0 * l.y[i] + 10.0 + 1.5 * l.x[i];
  }
  const SimpleSFit moved = simple_s_fit(y2, l.x, bi20(), 1.5, -1.0, 1e-12, 4.0 * eps2);
  CHECK(moved.slope == Approx(4.0 * base.slope + 1.5).epsilon(1e-7));
  CHECK(moved.intercept == Approx(4.0 * base.intercept + 10.0).epsilon(1e-7));
  CHECK(moved.scale == Approx(4.0 * base.scale).epsilon(1e-7));
}

TEST_CASE("simple_s_fit argument checks") {
  CHECK_THROWS_AS(simple_s_fit(std::vector<double>{1, 2}, std::vector<double>{1}, bi20(), 0, 1,
                               1e-6, 1e-6),
                  ArgumentError);
  CHECK_THROWS_AS(simple_s_fit(std::vector<double>{}, std::vector<double>{}, bi20(), 0, 1, 1e-6,
                               1e-6),
                  ArgumentError);
}
