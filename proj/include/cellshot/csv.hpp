#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cellshot/data.hpp"

namespace cellshot {

/// A rectangular, fully numeric table with a header row.
struct CsvDataset {
  std::vector<std::string> header;
  /// Column-major values, columns[j][i].
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  std::size_t column_index(const std::string& name) const;
};

/// Comma separated, '.' decimals, first line is the header. Blank cells and
/// NA/NaN tokens are rejected with the row and column named.
CsvDataset parse_csv(std::istream& in, const std::string& source = "<input>");
CsvDataset read_csv(const std::string& path);

/// Response column `response`; all other columns (or `predictors`, in order)
/// become the design.
RegressionData to_regression_data(const CsvDataset& csv, const std::string& response,
                                  const std::vector<std::string>& predictors = {});

/// Writes the response first, then the predictors, with full round-trip precision.
void write_csv(std::ostream& out, const RegressionData& data);

} // namespace cellshot
