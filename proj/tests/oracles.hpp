#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's quadrature, M-scale iteration or metric code.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// M_m = int_{-k}^{k} z^m phi(z) dz for even m, by the recursion
/// M_m = (m - 1) M_{m-2} - 2 k^{m-1} phi(k).
inline std::vector<long double> truncated_moments(long double k, int max_even) {
  const long double pi = std::numbers::pi_v<long double>;
  const long double phi_k = std::exp(-k * k / 2) / std::sqrt(2 * pi);
  std::vector<long double> m(static_cast<std::size_t>(max_even) + 1, 0.0L);
  m[0] = std::erf(k / std::sqrt(2.0L));
  for (int e = 2; e <= max_even; e += 2) {
    m[static_cast<std::size_t>(e)] =
        (e - 1) * m[static_cast<std::size_t>(e - 2)] - 2 * std::pow(k, e - 1) * phi_k;
  }
  return m;
}

/// delta for the biweight via rho = z^2/2 - z^4/(2k^2) + z^6/(6k^4) inside [-k, k].
inline double biweight_delta(double kd) {
  const long double k = kd;
  const auto m = truncated_moments(k, 6);
  const long double inside = m[2] / 2 - m[4] / (2 * k * k) + m[6] / (6 * k * k * k * k);
  return static_cast<double>(inside + k * k / 6 * (1 - m[0]));
}

inline double skipped_huber_delta(double kd) {
  const long double k = kd;
  const auto m = truncated_moments(k, 2);
  return static_cast<double>(m[2] / 2 + k * k / 2 * (1 - m[0]));
}

/// (E[Z psi])^2 / E[psi^2] for the biweight, expanded in truncated moments.
inline double biweight_efficiency(double kd) {
  const long double k = kd;
  const auto m = truncated_moments(k, 10);
  const long double k2 = k * k;
  const long double num = m[2] - 2 * m[4] / k2 + m[6] / (k2 * k2);
  const long double den = m[2] - 4 * m[4] / k2 + 6 * m[6] / (k2 * k2) -
                          4 * m[8] / (k2 * k2 * k2) + m[10] / (k2 * k2 * k2 * k2);
  return static_cast<double>(num * num / den);
}

/// Plain bisection of a decreasing function on [lo, hi].
inline double bisect_decreasing(const std::function<double(double)>& f, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Composite Simpson rule on [a, b] with `intervals` (even) sub-intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int intervals) {
  const double h = (b - a) / intervals;
  double sum = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) {
    sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return sum * h / 3.0;
}

/// M-scale by bisection on s of mean rho(r/s) - delta, which decreases in s.
inline double mscale_bisection(const std::vector<double>& r,
                               const std::function<double(double)>& rho, double delta) {
  std::vector<double> a(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    a[i] = std::abs(r[i]);
  }
  std::vector<double> sorted = a;
  std::sort(sorted.begin(), sorted.end());
  const double mad = 1.4826 * sorted[sorted.size() / 2];
  auto g = [&](double s) {
    long double acc = 0.0L;
    for (double v : r) {
      acc += rho(v / s);
    }
    return static_cast<double>(acc / r.size()) - delta;
  };
  double lo = 1e-12 * mad;
  double hi = 1e6 * mad;
  for (int i = 0; i < 300; ++i) {
    const double mid = std::sqrt(lo * hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

/// Unweighted simple least squares by the textbook sums formula.
inline std::pair<double, double> simple_ls(const std::vector<double>& y,
                                           const std::vector<double>& x) {
  long double n = static_cast<long double>(x.size());
  long double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += static_cast<long double>(x[i]) * x[i];
    sxy += static_cast<long double>(x[i]) * y[i];
  }
  const long double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {static_cast<double>(slope), static_cast<double>((sy - slope * sx) / n)};
}

/// Multiple LS via the normal equations (X'X) b = X'y with an intercept.
inline Eigen::VectorXd normal_equations(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  Eigen::MatrixXd Z(X.rows(), X.cols() + 1);
  Z.col(0).setOnes();
  Z.rightCols(X.cols()) = X;
  return (Z.transpose() * Z).inverse() * (Z.transpose() * y);
}

inline double sorted_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double normalized_mad(const std::vector<double>& v) {
  const double m = sorted_median(v);
  std::vector<double> d;
  for (double x : v) {
    d.push_back(std::abs(x - m));
  }
  return 1.4826 * sorted_median(d);
}

/// Spreadsheet-style n * MSE: explicit double loop over coefficients and replicates.
inline double n_mse(const std::vector<std::vector<double>>& est, const std::vector<double>& beta,
                    int n) {
  long double outer = 0.0L;
  for (std::size_t j = 0; j < beta.size(); ++j) {
    long double inner = 0.0L;
    for (const auto& e : est) {
      inner += (e[j] - beta[j]) * static_cast<long double>(e[j] - beta[j]);
    }
    outer += inner / est.size();
  }
  return static_cast<double>(n * outer / beta.size());
}

inline double and_metric(const std::vector<std::vector<double>>& est,
                         const std::vector<double>& full,
                         const std::vector<std::vector<double>>& columns,
                         const std::vector<double>& y) {
  const double my = normalized_mad(y);
  long double total = 0.0L;
  for (const auto& e : est) {
    long double acc = 0.0L;
    for (std::size_t j = 0; j < full.size(); ++j) {
      const double mx = normalized_mad(columns[j]);
      acc += (e[j] - full[j]) * static_cast<long double>(e[j] - full[j]) * mx * mx / (my * my);
    }
    total += std::sqrt(acc / full.size());
  }
  return static_cast<double>(total / est.size());
}

} // namespace oracle
