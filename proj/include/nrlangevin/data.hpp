#pragma once

#include <Eigen/Dense>
#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nrlangevin/errors.hpp"

namespace nrlangevin {

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool any_comma = line.find(',') != std::string::npos;
  if (any_comma) {
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(cur);
    if (!line.empty() && line.back() == ',') out.push_back("");
  } else {
    std::stringstream ss(line);
    while (ss >> cur) out.push_back(cur);
  }
  return out;
}

inline bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    std::string trimmed = s;
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.front())))
      trimmed.erase(trimmed.begin());
    while (!trimmed.empty() && (std::isspace(static_cast<unsigned char>(trimmed.back())) ||
                                trimmed.back() == '\r'))
      trimmed.pop_back();
    if (trimmed.empty()) return false;
    out = std::stod(trimmed, &pos);
    return pos == trimmed.size();
  } catch (...) {
    return false;
  }
}

inline std::vector<std::vector<double>> read_numeric_table(const std::string& path,
                                                           const char* what) {
  std::ifstream in(path);
  if (!in) throw DataError(std::string(what) + ": cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    const auto fields = split_fields(line);
    std::vector<double> row;
    row.reserve(fields.size());
    bool ok = true;
    for (const auto& f : fields) {
      double v;
      if (!parse_double(f, v)) {
        ok = false;
        break;
      }
      row.push_back(v);
    }
    if (!ok) {
      if (first_content_line) {  // header line, skip
        first_content_line = false;
        continue;
      }
      throw DataError(std::string(what) + ": non-numeric field at line " +
                      std::to_string(line_no) + " of " + path);
    }
    first_content_line = false;
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(std::string(what) + ": no data rows in " + path);
  return rows;
}

}  // namespace detail

struct RegressionData {
  Eigen::MatrixXd design;    // intercept column + standardized covariates
  Eigen::VectorXd response;  // entries in {0, 1}
};

// Reads a CSV of numeric covariate columns with a trailing binary outcome
// column (header auto-detected), standardizes each covariate to zero mean and
// unit variance, and prepends an intercept column.
inline RegressionData load_binary_regression_csv(const std::string& path) {
  const auto rows = detail::read_numeric_table(path, "regression loader");
  const std::size_t width = rows.front().size();
  if (width < 2) throw DataError("regression loader: need at least one covariate column");
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != width)
      throw DataError("regression loader: ragged row at data row " + std::to_string(r + 1));
    const double y = rows[r].back();
    if (y != 0.0 && y != 1.0)
      throw DataError("regression loader: outcome must be 0/1 at data row " +
                      std::to_string(r + 1));
  }

  const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index k = static_cast<Eigen::Index>(width) - 1;
  Eigen::MatrixXd raw(m, k);
  Eigen::VectorXd response(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) raw(i, j) = rows[i][j];
    response[i] = rows[i].back();
  }

  RegressionData data;
  data.design.resize(m, k + 1);
  data.design.col(0).setOnes();
  for (Eigen::Index j = 0; j < k; ++j) {
    const double mean = raw.col(j).mean();
    const double sd = std::sqrt((raw.col(j).array() - mean).square().sum() / m);
    if (!(sd > 0.0))
      throw DataError("regression loader: covariate column " + std::to_string(j + 1) +
                      " is constant");
    data.design.col(j + 1) = (raw.col(j).array() - mean) / sd;
  }
  data.response = response;
  return data;
}

// Validated Pima-shaped dataset: 768 rows, 8 covariates + outcome, d = 9 after
// the intercept.
inline RegressionData ingest_pima(const std::string& path) {
  RegressionData data = load_binary_regression_csv(path);
  if (data.design.rows() != 768 || data.design.cols() != 9)
    throw DataError("pima ingest: expected 768 rows and 8 covariate columns, got " +
                    std::to_string(data.design.rows()) + "x" +
                    std::to_string(data.design.cols() - 1));
  return data;
}

// Reads (x, y) point coordinates in [0,1]^2 (whitespace- or comma-separated)
// and bins them into an n x n grid of counts by floor(n * coord), clamping
// boundary points into the last cell.
inline Eigen::MatrixXi load_point_pattern_counts(const std::string& path, int n) {
  if (n < 2) throw std::invalid_argument("load_point_pattern_counts: grid side must be >= 2");
  const auto rows = detail::read_numeric_table(path, "point-pattern loader");
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(n, n);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != 2)
      throw DataError("point-pattern loader: expected two coordinates at data row " +
                      std::to_string(r + 1));
    const double x = rows[r][0], y = rows[r][1];
    if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0))
      throw DataError("point-pattern loader: coordinate outside [0,1]^2 at data row " +
                      std::to_string(r + 1));
    const int i = std::min(static_cast<int>(x * n), n - 1);
    const int j = std::min(static_cast<int>(y * n), n - 1);
    counts(i, j) += 1;
  }
  return counts;
}

}  // namespace nrlangevin
