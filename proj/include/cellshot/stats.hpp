#pragma once

#include <span>
#include <vector>

namespace cellshot {

/// Normal-consistency factor for the median absolute deviation.
inline constexpr double kMadConstant = 1.4826;

/// Median with the midpoint convention for even sizes. Throws ArgumentError
/// on empty input.
double median(std::span<const double> values);

/// Normalized MAD: 1.4826 * median |v - median(v)|.
double mad(std::span<const double> values);

/// Neumaier-compensated sum.
double stable_sum(std::span<const double> values);

/// Incremental Neumaier accumulator, used where values arrive one at a time.
class CompensatedSum {
public:
  void add(double v);
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

} // namespace cellshot
