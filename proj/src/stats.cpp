#include "cellshot/stats.hpp"

#include <algorithm>
#include <cmath>

#include "cellshot/errors.hpp"

namespace cellshot {

double median(std::span<const double> values) {
  if (values.empty()) {
    throw ArgumentError("median of an empty vector");
  }
  std::vector<double> buf(values.begin(), values.end());
  const std::size_t n = buf.size();
  const std::size_t mid = n / 2;
  std::nth_element(buf.begin(), buf.begin() + mid, buf.end());
  const double upper = buf[mid];
  if (n % 2 == 1) {
    return upper;
  }
  const double lower = *std::max_element(buf.begin(), buf.begin() + mid);
  return 0.5 * (lower + upper);
}

double mad(std::span<const double> values) {
  const double m = median(values);
  std::vector<double> dev(values.size());
  std::transform(values.begin(), values.end(), dev.begin(),
                 [m](double v) { return std::abs(v - m); });
  return kMadConstant * median(dev);
}

void CompensatedSum::add(double v) {
  const double t = sum_ + v;
  if (std::abs(sum_) >= std::abs(v)) {
    comp_ += (sum_ - t) + v;
  } else {
    comp_ += (v - t) + sum_;
  }
  sum_ = t;
}

double stable_sum(std::span<const double> values) {
  CompensatedSum acc;
  for (double v : values) {
    acc.add(v);
  }
  return acc.value();
}

} // namespace cellshot
