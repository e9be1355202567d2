#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pggibbs/errors.hpp"
#include "pggibbs/model.hpp"

namespace pggibbs {

// Rectangular numeric table: comma separator, mandatory header row, '.'
// decimal point, scientific notation accepted. Anything else is an error
// that names the offending row and column.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  long n_rows() const { return static_cast<long>(rows.size()); }
  long find_column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    return it == columns.end() ? -1
                               : static_cast<long>(it - columns.begin());
  }
};

namespace csv_detail {

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

inline double parse_cell(const std::string& cell, long row1,
                         const std::string& column) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  // Overflow surfaces as +-inf and fails the finite check; underflow to a
  // subnormal or zero is the nearest representable value and is accepted.
  if (end == begin || *end != '\0' || !std::isfinite(value))
    throw ParseError("row " + std::to_string(row1) + ", column '" + column +
                     "': cannot parse '" + cell + "' as a finite number");
  return value;
}

}  // namespace csv_detail

inline CsvTable read_csv(std::istream& in, const std::string& origin) {
  CsvTable table;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      // A single trailing blank line is tolerated; blank lines inside the
      // table are malformed.
      std::string rest;
      if (std::getline(in, rest))
        throw ParseError(origin + ": row " + std::to_string(line_no) +
                         " is empty");
      break;
    }
    const auto cells = csv_detail::split_line(line);
    if (table.columns.empty()) {
      for (const auto& name : cells) {
        if (name.empty())
          throw ParseError(origin + ": header has an empty column name");
        if (std::find(table.columns.begin(), table.columns.end(), name) !=
            table.columns.end())
          throw ParseError(origin + ": duplicate column name '" + name + "'");
        table.columns.push_back(name);
      }
      continue;
    }
    if (cells.size() != table.columns.size())
      throw ParseError(origin + ": row " + std::to_string(line_no) +
                       ": expected " + std::to_string(table.columns.size()) +
                       " fields, got " + std::to_string(cells.size()));
    std::vector<double> row(cells.size());
    for (size_t j = 0; j < cells.size(); ++j)
      row[j] = csv_detail::parse_cell(cells[j], line_no, table.columns[j]);
    table.rows.push_back(std::move(row));
  }
  if (table.columns.empty())
    throw ParseError(origin + ": missing header row");
  return table;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open for reading");
  return read_csv(in, path);
}

// Assemble a modeling dataset from a parsed table: the named response
// column (strictly 0/1), the listed covariates (empty list means every
// other column, in file order), and an optional leading intercept.
inline Dataset make_dataset(const CsvTable& table, const std::string& y_column,
                            const std::vector<std::string>& covariates,
                            bool add_intercept) {
  const long y_idx = table.find_column(y_column);
  if (y_idx < 0)
    throw ParseError("response column '" + y_column + "' not found");
  if (table.n_rows() < 1) throw ParseError("no data rows");

  std::vector<long> cov_idx;
  if (covariates.empty()) {
    for (long j = 0; j < static_cast<long>(table.columns.size()); ++j)
      if (j != y_idx) cov_idx.push_back(j);
  } else {
    for (const auto& name : covariates) {
      const long j = table.find_column(name);
      if (j < 0) throw ParseError("covariate column '" + name + "' not found");
      if (j == y_idx)
        throw ParseError("covariate list names the response column '" + name +
                         "'");
      if (std::find(cov_idx.begin(), cov_idx.end(), j) != cov_idx.end())
        throw ParseError("covariate column '" + name + "' listed twice");
      cov_idx.push_back(j);
    }
  }
  const long p = static_cast<long>(cov_idx.size()) + (add_intercept ? 1 : 0);
  if (p < 1)
    throw ParseError("no covariates selected and no intercept requested");

  Dataset d;
  d.X.resize(table.n_rows(), p);
  d.y.resize(table.n_rows());
  if (add_intercept) {
    d.X.col(0).setOnes();
    d.coef_names.push_back("(intercept)");
  }
  for (size_t k = 0; k < cov_idx.size(); ++k) {
    const long col = (add_intercept ? 1 : 0) + static_cast<long>(k);
    for (long i = 0; i < table.n_rows(); ++i)
      d.X(i, col) = table.rows[static_cast<size_t>(i)]
                              [static_cast<size_t>(cov_idx[k])];
    d.coef_names.push_back(table.columns[static_cast<size_t>(cov_idx[k])]);
  }
  for (long i = 0; i < table.n_rows(); ++i) {
    const double v =
        table.rows[static_cast<size_t>(i)][static_cast<size_t>(y_idx)];
    if (v != 0.0 && v != 1.0)
      throw ParseError("row " + std::to_string(i + 2) + ", column '" +
                       y_column + "': y must be 0 or 1");
    d.y[i] = static_cast<int>(v);
  }
  d.validate();
  return d;
}

namespace csv_detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace csv_detail

// One row per kept draw with a leading 1-based chain id; %.17g preserves
// every double bit-exactly across a write/read round trip.
inline void write_draws_csv(std::ostream& out,
                            const std::vector<Eigen::MatrixXd>& chains,
                            const std::vector<std::string>& coef_names) {
  out << "chain";
  for (const auto& name : coef_names) out << ',' << name;
  out << '\n';
  for (size_t c = 0; c < chains.size(); ++c) {
    for (Eigen::Index i = 0; i < chains[c].rows(); ++i) {
      out << (c + 1);
      for (Eigen::Index j = 0; j < chains[c].cols(); ++j)
        out << ',' << csv_detail::format_double(chains[c](i, j));
      out << '\n';
    }
  }
}

inline void write_draws_csv(const std::string& path,
                            const std::vector<Eigen::MatrixXd>& chains,
                            const std::vector<std::string>& coef_names) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path + ": cannot open for writing");
  write_draws_csv(out, chains, coef_names);
  if (!out) throw ParseError(path + ": write failed");
}

// Inverse of write_draws_csv: per-chain matrices plus coefficient names.
// Chain ids must form contiguous 1-based blocks.
inline std::pair<std::vector<Eigen::MatrixXd>, std::vector<std::string>>
read_draws_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  if (table.columns.empty() || table.columns[0] != "chain")
    throw ParseError(path + ": first column must be 'chain'");
  if (table.columns.size() < 2)
    throw ParseError(path + ": no coefficient columns");
  std::vector<std::string> names(table.columns.begin() + 1,
                                 table.columns.end());

  std::vector<std::vector<std::vector<double>>> grouped;
  for (long i = 0; i < table.n_rows(); ++i) {
    const auto& row = table.rows[static_cast<size_t>(i)];
    const double id = row[0];
    if (id != std::floor(id) || id < 1.0)
      throw ParseError(path + ": row " + std::to_string(i + 2) +
                       ": chain id must be a positive integer");
    const auto chain = static_cast<size_t>(id);
    if (chain == grouped.size() + 1) grouped.emplace_back();
    if (chain != grouped.size())
      throw ParseError(path + ": row " + std::to_string(i + 2) +
                       ": chain ids must form contiguous 1-based blocks");
    grouped.back().emplace_back(row.begin() + 1, row.end());
  }

  std::vector<Eigen::MatrixXd> chains;
  for (const auto& block : grouped) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(block.size()),
                      static_cast<Eigen::Index>(names.size()));
    for (size_t i = 0; i < block.size(); ++i)
      for (size_t j = 0; j < names.size(); ++j)
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            block[i][j];
    chains.push_back(std::move(m));
  }
  return {std::move(chains), std::move(names)};
}

}  // namespace pggibbs
