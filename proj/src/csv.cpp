#include "cellshot/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>

#include "cellshot/errors.hpp"

namespace cellshot {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(std::string_view(line).substr(
        start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) {
      break;
    }
    start = comma + 1;
  }
  return fields;
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

std::string location(const std::string& source, std::size_t line, const std::string& column) {
  return source + ": line " + std::to_string(line) + ", column '" + column + "'";
}

} // namespace

std::size_t CsvDataset::column_index(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw IngestionError("no column named '" + name + "'");
  }
  return static_cast<std::size_t>(it - header.begin());
}

CsvDataset parse_csv(std::istream& in, const std::string& source) {
  CsvDataset csv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      break;
    }
  }
  if (trim(line).empty()) {
    throw IngestionError(source + ": empty file");
  }
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
    line.erase(0, 3);
  }
  for (auto& name : split(line)) {
    name = unquote(name);
    if (name.empty()) {
      throw IngestionError(source + ": empty column name in header");
    }
    csv.header.push_back(name);
  }
  csv.columns.resize(csv.header.size());

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      continue;
    }
    const auto fields = split(line);
    if (fields.size() != csv.header.size()) {
      throw IngestionError(source + ": line " + std::to_string(line_no) + " has " +
                           std::to_string(fields.size()) + " fields, expected " +
                           std::to_string(csv.header.size()));
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const std::string& f = fields[j];
      if (f.empty()) {
        throw IngestionError("missing value at " + location(source, line_no, csv.header[j]));
      }
      double value = 0.0;
      const char* begin = f.data();
      const char* end = f.data() + f.size();
      if (*begin == '+') {
        ++begin;
      }
      const auto [ptr, ec] = std::from_chars(begin, end, value);
      if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw IngestionError("non-numeric value '" + f + "' at " +
                             location(source, line_no, csv.header[j]));
      }
      csv.columns[j].push_back(value);
    }
  }
  if (csv.rows() == 0) {
    throw IngestionError(source + ": no data rows");
  }
  return csv;
}

CsvDataset read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IngestionError("cannot open '" + path + "'");
  }
  return parse_csv(in, path);
}

RegressionData to_regression_data(const CsvDataset& csv, const std::string& response,
                                  const std::vector<std::string>& predictors) {
  const std::size_t y_col = csv.column_index(response);
  std::vector<std::size_t> x_cols;
  if (predictors.empty()) {
    for (std::size_t j = 0; j < csv.header.size(); ++j) {
      if (j != y_col) {
        x_cols.push_back(j);
      }
    }
  } else {
    for (const auto& name : predictors) {
      x_cols.push_back(csv.column_index(name));
    }
  }
  if (x_cols.empty()) {
    throw IngestionError("no predictor columns besides the response '" + response + "'");
  }
  const auto n = static_cast<Eigen::Index>(csv.rows());
  RegressionData data;
  data.response_name = response;
  data.y = Eigen::Map<const Eigen::VectorXd>(csv.columns[y_col].data(), n);
  data.X.resize(n, static_cast<Eigen::Index>(x_cols.size()));
  for (std::size_t k = 0; k < x_cols.size(); ++k) {
    data.X.col(static_cast<Eigen::Index>(k)) =
        Eigen::Map<const Eigen::VectorXd>(csv.columns[x_cols[k]].data(), n);
    data.column_names.push_back(csv.header[x_cols[k]]);
  }
  return data;
}

void write_csv(std::ostream& out, const RegressionData& data) {
  const auto names =
      data.column_names.empty() ? default_column_names(data.p()) : data.column_names;
  out << data.response_name;
  for (const auto& name : names) {
    out << ',' << name;
  }
  out << '\n';
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    out << data.y(i);
    for (Eigen::Index j = 0; j < data.p(); ++j) {
      out << ',' << data.X(i, j);
    }
    out << '\n';
  }
  out.precision(old_precision);
}

} // namespace cellshot
