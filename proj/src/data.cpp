#include "cellshot/data.hpp"

#include "cellshot/errors.hpp"

namespace cellshot {

std::vector<std::string> default_column_names(Eigen::Index p) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) {
    names.push_back("x" + std::to_string(j + 1));
  }
  return names;
}

void validate(const RegressionData& data) {
  if (data.y.size() != data.X.rows()) {
    throw ArgumentError("response length " + std::to_string(data.y.size()) +
                        " does not match design rows " + std::to_string(data.X.rows()));
  }
  if (data.X.cols() < 1) {
    throw ArgumentError("design matrix has no columns");
  }
  if (!data.column_names.empty() &&
      static_cast<Eigen::Index>(data.column_names.size()) != data.X.cols()) {
    throw ArgumentError("column name count does not match design columns");
  }
  if (!data.y.allFinite() || !data.X.allFinite()) {
    throw ArgumentError("data contain non-finite values");
  }
}

RegressionData subset_rows(const RegressionData& data, const std::vector<Eigen::Index>& rows) {
  RegressionData out;
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  out.X.resize(static_cast<Eigen::Index>(rows.size()), data.X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = rows[i];
    out.y(static_cast<Eigen::Index>(i)) = data.y(r);
    out.X.row(static_cast<Eigen::Index>(i)) = data.X.row(r);
  }
  out.column_names = data.column_names;
  out.response_name = data.response_name;
  return out;
}

} // namespace cellshot
