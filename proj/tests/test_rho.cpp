#include <doctest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "cellshot/errors.hpp"
#include "cellshot/rho.hpp"
#include "oracles.hpp"

using namespace cellshot;
using doctest::Approx;

namespace {

const RhoSpec& bi342() {
  static const RhoSpec spec = make_rho(RhoKind::biweight, {3.420});
  return spec;
}

const RhoSpec& skh2177() {
  static const RhoSpec spec = make_rho(RhoKind::skipped_huber, {2.177});
  return spec;
}

std::vector<RhoSpec> sample_specs() {
  return {bi342(), skh2177(), make_rho(RhoKind::biweight, {1.547}),
          make_rho(RhoKind::lqq, {1.5 * 0.982, 0.982, 1.5}),
          make_rho(RhoKind::lqq, {0.40159, 0.26772, 1.5})};
}

// Kinks of rho' where a centred difference is not meaningful.
std::vector<double> kinks(const RhoSpec& spec) {
  if (spec.kind == RhoKind::lqq) {
    const double b = spec.constants[0], c = spec.constants[1], s = spec.constants[2];
    const double a = (2 * c + 2 * b - s * b) / (s - 1);
    return {c, b + c, a + b + c};
  }
  return {spec.constants[0]};
}

} // namespace

TEST_CASE("rho_eval matches the piecewise formulas") {
  CHECK(rho_eval(bi342(), 0.0) == 0.0);
  CHECK(rho_eval(bi342(), 5.0) == Approx(3.420 * 3.420 / 6.0).epsilon(1e-15));
  CHECK(rho_eval(bi342(), 5.0) == Approx(1.9494).epsilon(1e-4));
  CHECK(rho_eval(skh2177(), 1.0) == 0.5);
  // mpmath, 40 digits: (k^2/6)(1 - (1 - (1/k)^2)^3) at k = 3.42
  CHECK(rho_eval(bi342(), 1.0) == Approx(0.45847007614953112916).epsilon(1e-14));
  CHECK(rho_eval(bi342(), -1.0) == rho_eval(bi342(), 1.0));
}

TEST_CASE("rho_prime values") {
  CHECK(rho_prime(skh2177(), 1.0) == 1.0);
  CHECK(rho_prime(bi342(), 4.0) == 0.0);
  const double k = 3.420;
  // z (1 - (z/k)^2)^2 at z = k/2
  CHECK(rho_prime(bi342(), k / 2) == Approx(0.28125 * k).epsilon(1e-14));
  CHECK(rho_prime(bi342(), -k / 2) == Approx(-0.28125 * k).epsilon(1e-14));
}

TEST_CASE("irls_weight values and limits") {
  CHECK(irls_weight(skh2177(), 0.5) == 1.0);
  CHECK(irls_weight(make_rho(RhoKind::skipped_huber, {7.0}), 0.5) == 1.0);
  CHECK(irls_weight(bi342(), 0.0) == 1.0);
  CHECK(irls_weight(bi342(), 1e-9) == Approx(1.0));
  CHECK(irls_weight(bi342(), 4.0) == 0.0);
  CHECK(irls_weight(skh2177(), 3.0) == 0.0);
}

TEST_CASE("rho-function invariants over random points") {
  std::mt19937_64 gen(11);
  for (const RhoSpec& spec : sample_specs()) {
    CAPTURE(to_string(spec.kind));
    const double support = spec.support();
    std::uniform_real_distribution<double> unif(-2 * support, 2 * support);
    CHECK(rho_eval(spec, 0.0) == 0.0);
    CHECK(rho_eval(spec, 3 * support) == Approx(spec.rho_sup).epsilon(1e-14));
    CHECK(spec.delta > 0.0);
    CHECK(spec.delta < spec.rho_sup);
    int checked = 0;
    while (checked < 100) {
      const double z = unif(gen);
      bool near_kink = false;
      for (double kink : kinks(spec)) {
        near_kink = near_kink || std::abs(std::abs(z) - kink) < 1e-3;
      }
      if (near_kink) {
        continue;
      }
      ++checked;
      CHECK(rho_eval(spec, z) == rho_eval(spec, -z));
      CHECK(rho_eval(spec, z) <= spec.rho_sup);
      CHECK(rho_eval(spec, 1.01 * z) >= rho_eval(spec, z));
      const double h = 1e-5;
      const double fd = (rho_eval(spec, z + h) - rho_eval(spec, z - h)) / (2 * h);
      CHECK(rho_prime(spec, z) == Approx(fd).epsilon(1e-6).scale(1.0));
      const double w = irls_weight(spec, z);
      if (spec.kind != RhoKind::lqq) {
        CHECK(w >= 0.0);
        CHECK(w <= 1.0);
      }
      CHECK(w == Approx(rho_prime(spec, z) / z).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("expected_rho_normal agrees with the truncated-moment oracle") {
  for (double k : {0.5, 1.547, 2.5, 3.42, 4.685, 9.0}) {
    CAPTURE(k);
    CHECK(std::abs(expected_rho_normal(make_rho(RhoKind::skipped_huber, {k})) -
                   oracle::skipped_huber_delta(k)) < 1e-10);
    CHECK(std::abs(expected_rho_normal(make_rho(RhoKind::biweight, {k})) -
                   oracle::biweight_delta(k)) < 1e-10);
  }
  // mpmath reference values
  CHECK(std::abs(bi342().delta - 0.38999872858028625407) < 1e-10);
  CHECK(std::abs(skh2177().delta - 0.47390376479081503309) < 1e-10);
}

TEST_CASE("implied breakdown points of the simulation constants") {
  CHECK(bi342().breakdown_point() == Approx(0.20).epsilon(0.025));
  CHECK(std::abs(bi342().breakdown_point() - 0.20) < 0.005);
  CHECK(std::abs(skh2177().breakdown_point() - 0.20) < 0.005);
  // k -> infinity: the skipped Huber approaches the quadratic loss, E[Z^2/2] = 1/2
  CHECK(make_rho(RhoKind::skipped_huber, {30.0}).delta == Approx(0.5).epsilon(1e-12));
}

TEST_CASE("tune_for_bdp") {
  const auto t0 = std::chrono::steady_clock::now();
  const RhoSpec bi = tune_for_bdp(RhoKind::biweight, 0.20);
  const RhoSpec skh = tune_for_bdp(RhoKind::skipped_huber, 0.20);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(secs < 1.0);
  CHECK(std::abs(bi.constants[0] - 3.420) < 0.005);
  CHECK(std::abs(skh.constants[0] - 2.177) < 0.005);
  // bisection against the mpmath quadrature oracle
  CHECK(bi.constants[0] == Approx(3.42068131358395).epsilon(1e-9));
  CHECK(skh.constants[0] == Approx(2.17692151238732).epsilon(1e-9));

  const RhoSpec bi50 = tune_for_bdp(RhoKind::biweight, 0.50);
  CHECK(bi50.constants[0] == Approx(1.54764498092823).epsilon(1e-9));
  const double oracle_k = oracle::bisect_decreasing(
      [](double k) { return oracle::biweight_delta(k) / (k * k / 6) - 0.5; }, 0.5, 6.0);
  CHECK(bi50.constants[0] == Approx(oracle_k).epsilon(1e-9));

  for (double bdp : {0.05, 0.2, 0.33, 0.5}) {
    for (RhoKind kind : {RhoKind::biweight, RhoKind::skipped_huber, RhoKind::lqq}) {
      const RhoSpec spec = tune_for_bdp(kind, bdp);
      CHECK(std::abs(expected_rho_normal(spec) / spec.rho_sup - bdp) < 1e-6);
    }
  }
  CHECK_THROWS_AS(tune_for_bdp(RhoKind::biweight, 0.0), ArgumentError);
  CHECK_THROWS_AS(tune_for_bdp(RhoKind::biweight, 0.6), ArgumentError);
}

TEST_CASE("tune_for_efficiency") {
  const RhoSpec bi95 = tune_for_efficiency(RhoKind::biweight, 0.95);
  CHECK(bi95.constants[0] == Approx(4.68506494854338).epsilon(1e-9));
  const double oracle_k = oracle::bisect_decreasing(
      [](double k) { return 0.95 - oracle::biweight_efficiency(k); }, 2.0, 8.0);
  CHECK(bi95.constants[0] == Approx(oracle_k).epsilon(1e-9));
  CHECK(std::abs(efficiency_normal(bi95) - 0.95) < 1e-4);

  double previous = 0.0;
  for (double eff : {0.8, 0.9, 0.95, 0.99, 0.999}) {
    const double k = tune_for_efficiency(RhoKind::biweight, eff).constants[0];
    CHECK(k > previous);
    previous = k;
  }
  CHECK(previous > 8.0);
  CHECK_THROWS_AS(tune_for_efficiency(RhoKind::biweight, 1.0), ArgumentError);
}

TEST_CASE("lqq calibration with the fixed 1.5 / 1.5 shape") {
  const RhoSpec bdp50 = tune_for_bdp(RhoKind::lqq, 0.50);
  const RhoSpec eff95 = tune_for_efficiency(RhoKind::lqq, 0.95);
  // mpmath joint oracle (psi integrated numerically, bisection on c)
  CHECK(bdp50.constants[1] == Approx(0.267724607904).epsilon(1e-8));
  CHECK(eff95.constants[1] == Approx(0.982292783481).epsilon(1e-8));
  CHECK(bdp50.constants[0] == Approx(1.5 * bdp50.constants[1]));
  CHECK(bdp50.constants[2] == 1.5);

  // Simpson check of the efficiency, independent of the Gauss-Kronrod path
  const double K = eff95.support();
  auto zpsi = [&](double z) {
    return z * rho_prime(eff95, z) * std::exp(-z * z / 2) / std::sqrt(2 * std::numbers::pi);
  };
  auto psi2 = [&](double z) {
    const double p = rho_prime(eff95, z);
    return p * p * std::exp(-z * z / 2) / std::sqrt(2 * std::numbers::pi);
  };
  const double num = 2 * oracle::simpson(zpsi, 0.0, K, 200000);
  const double den = 2 * oracle::simpson(psi2, 0.0, K, 200000);
  CHECK(std::abs(num * num / den - 0.95) < 1e-4);
}

TEST_CASE("hard_rejection_weight") {
  CHECK(hard_rejection_weight(2.9, 3.0) == 1.0);
  CHECK(hard_rejection_weight(3.1, 3.0) == 0.0);
  CHECK(hard_rejection_weight(0.0, 0.1) == 1.0);
  CHECK(hard_rejection_weight(3.0, 3.0) == 1.0);
}

TEST_CASE("make_rho rejects bad constants") {
  CHECK_THROWS_AS(make_rho(RhoKind::biweight, {-1.0}), ArgumentError);
  CHECK_THROWS_AS(make_rho(RhoKind::biweight, {1.0, 2.0}), ArgumentError);
  CHECK_THROWS_AS(make_rho(RhoKind::lqq, {1.0, 1.0, 0.5}), ArgumentError);
  CHECK(parse_rho_kind("skipped-huber") == RhoKind::skipped_huber);
  CHECK_THROWS_AS(parse_rho_kind("huber"), ArgumentError);
}
