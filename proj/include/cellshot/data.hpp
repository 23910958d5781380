#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cellshot {

/// Response y (n) and design X (n x p), without an intercept column.
struct RegressionData {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  std::vector<std::string> column_names;
  std::string response_name = "y";

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }
};

/// Default names x1..xp, used when data come without a header.
std::vector<std::string> default_column_names(Eigen::Index p);

/// Checks shapes, finiteness and name count. Throws ArgumentError.
void validate(const RegressionData& data);

/// Rows `rows` of `data`, names kept.
RegressionData subset_rows(const RegressionData& data, const std::vector<Eigen::Index>& rows);

} // namespace cellshot
