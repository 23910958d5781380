#include "cellshot/rho.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cellshot/errors.hpp"

namespace cellshot {

namespace {

// Beyond this the normal density is below 1e-300 and contributes nothing.
constexpr double kIntegrationCap = 38.0;

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

struct Lqq {
  double b, c, s, a;
};

Lqq lqq_params(const RhoSpec& spec) {
  const double b = spec.constants[0];
  const double c = spec.constants[1];
  const double s = spec.constants[2];
  return {b, c, s, (2.0 * c + 2.0 * b - s * b) / (s - 1.0)};
}

double lqq_rho(const Lqq& q, double ax) {
  if (ax <= q.c) {
    return 0.5 * ax * ax;
  }
  const double bc = q.b + q.c;
  const double at_bc = 0.5 * bc * bc - q.s * q.b * q.b / 6.0;
  if (ax <= bc) {
    const double t = ax - q.c;
    return 0.5 * ax * ax - q.s * t * t * t / (6.0 * q.b);
  }
  const double sup = at_bc + (q.s - 1.0) * q.a * q.a / 6.0;
  if (ax >= bc + q.a) {
    return sup;
  }
  const double rest = q.a - (ax - bc);
  return at_bc + (q.s - 1.0) / (6.0 * q.a) * (q.a * q.a * q.a - rest * rest * rest);
}

double lqq_psi_abs(const Lqq& q, double ax) {
  if (ax <= q.c) {
    return ax;
  }
  const double bc = q.b + q.c;
  if (ax <= bc) {
    const double t = ax - q.c;
    return ax - q.s / (2.0 * q.b) * t * t;
  }
  if (ax >= bc + q.a) {
    return 0.0;
  }
  const double rest = q.a + bc - ax;
  return (q.s - 1.0) / (2.0 * q.a) * rest * rest;
}

// Smooth pieces of rho on [0, support].
std::vector<double> breakpoints(const RhoSpec& spec) {
  if (spec.kind == RhoKind::lqq) {
    const Lqq q = lqq_params(spec);
    return {0.0, q.c, q.b + q.c, q.a + q.b + q.c};
  }
  return {0.0, spec.constants[0]};
}

// 2 * integral over [0, support] of f(z) phi(z), piecewise.
template <class F>
double symmetric_normal_integral(const RhoSpec& spec, F&& f) {
  using boost::math::quadrature::gauss_kronrod;
  const auto knots = breakpoints(spec);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double lo = std::min(knots[i], kIntegrationCap);
    const double hi = std::min(knots[i + 1], kIntegrationCap);
    if (hi <= lo) {
      continue;
    }
    total += gauss_kronrod<double, 61>::integrate(
        [&](double z) { return f(z) * normal_pdf(z); }, lo, hi, 15, 1e-14);
  }
  return 2.0 * total;
}

double rho_sup_of(RhoKind kind, const std::vector<double>& constants) {
  switch (kind) {
  case RhoKind::biweight:
    return constants[0] * constants[0] / 6.0;
  case RhoKind::skipped_huber:
    return constants[0] * constants[0] / 2.0;
  case RhoKind::lqq: {
    RhoSpec tmp{kind, constants, 0.0, 0.0};
    const Lqq q = lqq_params(tmp);
    return lqq_rho(q, q.a + q.b + q.c);
  }
  }
  return 0.0;
}

std::vector<double> constants_for(RhoKind kind, double k) {
  if (kind == RhoKind::lqq) {
    return {kLqqBOverC * k, k, kLqqS};
  }
  return {k};
}

template <class Objective>
double bisect_decreasing(Objective&& g, double lo, double hi, const char* what) {
  double glo = g(lo);
  double ghi = g(hi);
  if (glo < 0.0 || ghi > 0.0) {
    throw CalibrationError(std::string("cannot bracket tuning constant for ") + what);
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

} // namespace

std::string_view to_string(RhoKind kind) {
  switch (kind) {
  case RhoKind::biweight:
    return "biweight";
  case RhoKind::skipped_huber:
    return "skipped-huber";
  case RhoKind::lqq:
    return "lqq";
  }
  return "unknown";
}

RhoKind parse_rho_kind(std::string_view name) {
  if (name == "biweight" || name == "bi") {
    return RhoKind::biweight;
  }
  if (name == "skipped-huber" || name == "skipped_huber" || name == "skh") {
    return RhoKind::skipped_huber;
  }
  if (name == "lqq") {
    return RhoKind::lqq;
  }
  throw ArgumentError("unknown rho function '" + std::string(name) + "'");
}

double RhoSpec::support() const {
  if (kind == RhoKind::lqq) {
    const Lqq q = lqq_params(*this);
    return q.a + q.b + q.c;
  }
  return constants[0];
}

RhoSpec make_rho(RhoKind kind, std::vector<double> constants) {
  const std::size_t expected = kind == RhoKind::lqq ? 3 : 1;
  if (constants.size() != expected) {
    throw ArgumentError("wrong number of tuning constants for " +
                        std::string(to_string(kind)));
  }
  for (double c : constants) {
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw ArgumentError("tuning constants must be positive and finite");
    }
  }
  if (kind == RhoKind::lqq && !(constants[2] > 1.0)) {
    throw ArgumentError("lqq slope parameter s must exceed 1");
  }
  RhoSpec spec{kind, std::move(constants), 0.0, 0.0};
  spec.rho_sup = rho_sup_of(kind, spec.constants);
  spec.delta = expected_rho_normal(spec);
  return spec;
}

double rho_eval(const RhoSpec& spec, double z) {
  const double az = std::abs(z);
  switch (spec.kind) {
  case RhoKind::biweight: {
    const double k = spec.constants[0];
    if (az > k) {
      return k * k / 6.0;
    }
    const double u = z / k;
    const double t = 1.0 - u * u;
    return k * k / 6.0 * (1.0 - t * t * t);
  }
  case RhoKind::skipped_huber: {
    const double k = spec.constants[0];
    return az > k ? 0.5 * k * k : 0.5 * z * z;
  }
  case RhoKind::lqq:
    return lqq_rho(lqq_params(spec), az);
  }
  return 0.0;
}

double rho_prime(const RhoSpec& spec, double z) {
  const double az = std::abs(z);
  switch (spec.kind) {
  case RhoKind::biweight: {
    const double k = spec.constants[0];
    if (az > k) {
      return 0.0;
    }
    const double u = z / k;
    const double t = 1.0 - u * u;
    return z * t * t;
  }
  case RhoKind::skipped_huber:
    return az > spec.constants[0] ? 0.0 : z;
  case RhoKind::lqq:
    return std::copysign(lqq_psi_abs(lqq_params(spec), az), z);
  }
  return 0.0;
}

double irls_weight(const RhoSpec& spec, double z) {
  const double az = std::abs(z);
  switch (spec.kind) {
  case RhoKind::biweight: {
    const double k = spec.constants[0];
    if (az > k) {
      return 0.0;
    }
    const double u = z / k;
    const double t = 1.0 - u * u;
    return t * t;
  }
  case RhoKind::skipped_huber:
    return az > spec.constants[0] ? 0.0 : 1.0;
  case RhoKind::lqq: {
    const Lqq q = lqq_params(spec);
    if (az <= q.c) {
      return 1.0;
    }
    return lqq_psi_abs(q, az) / az;
  }
  }
  return 0.0;
}

double expected_rho_normal(const RhoSpec& spec) {
  const double body = symmetric_normal_integral(spec, [&](double z) { return rho_eval(spec, z); });
  const double tail = spec.rho_sup * std::erfc(spec.support() / std::numbers::sqrt2);
  return body + tail;
}

double efficiency_normal(const RhoSpec& spec) {
  const double num =
      symmetric_normal_integral(spec, [&](double z) { return z * rho_prime(spec, z); });
  const double den = symmetric_normal_integral(spec, [&](double z) {
    const double p = rho_prime(spec, z);
    return p * p;
  });
  return num * num / den;
}

RhoSpec tune_for_bdp(RhoKind kind, double bdp) {
  if (!(bdp > 0.0 && bdp <= 0.5)) {
    throw ArgumentError("breakdown point must lie in (0, 0.5]");
  }
  auto bdp_gap = [&](double k) {
    RhoSpec spec{kind, constants_for(kind, k), 0.0, 0.0};
    spec.rho_sup = rho_sup_of(kind, spec.constants);
    return expected_rho_normal(spec) / spec.rho_sup - bdp;
  };
  const double k = bisect_decreasing(bdp_gap, 0.02, 60.0, "breakdown point");
  return make_rho(kind, constants_for(kind, k));
}

RhoSpec tune_for_efficiency(RhoKind kind, double eff) {
  if (!(eff > 0.5 && eff < 1.0)) {
    throw ArgumentError("efficiency must lie in (0.5, 1)");
  }
  auto eff_gap = [&](double k) {
    RhoSpec spec{kind, constants_for(kind, k), 0.0, 0.0};
    return eff - efficiency_normal(spec);
  };
  const double k = bisect_decreasing(eff_gap, 0.02, 60.0, "efficiency");
  return make_rho(kind, constants_for(kind, k));
}

double hard_rejection_weight(double r, double c) { return r <= c ? 1.0 : 0.0; }

} // namespace cellshot
