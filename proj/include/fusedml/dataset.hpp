#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "fusedml/errors.hpp"

namespace fusedml {

/// Column-major table of doubles, as produced by the CSV reader.
struct RawTable {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
};

/// Unit counts per (treatment, sample) cell.
struct CellCounts {
  std::array<std::array<long, 2>, 2> count{{{0, 0}, {0, 0}}};  // [t][s]

  long at(int t, int s) const { return count[t][s]; }
  long total() const {
    return count[0][0] + count[0][1] + count[1][0] + count[1][1];
  }
};

/// A fused experimental+observational sample. s==1 marks experimental units.
/// Instances are built through validate_dataset and treated as immutable; all
/// downstream code takes them by const reference.
struct Dataset {
  Eigen::VectorXd y;        // outcome
  std::vector<int> t;       // treatment, {0,1}
  std::vector<int> s;       // sample indicator, {0,1}
  Eigen::MatrixXd x;        // n x d covariates
  std::vector<double> known_e_exp;  // optional Pr(T=1|x,S=1) per unit
  std::vector<double> known_p;      // optional Pr(S=1|x) per unit

  Eigen::Index n() const { return y.size(); }
  Eigen::Index dim() const { return x.cols(); }
  bool has_known_e_exp() const { return !known_e_exp.empty(); }
  bool has_known_p() const { return !known_p.empty(); }
};

inline CellCounts count_cells(const Dataset& data) {
  CellCounts cells;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    ++cells.count[data.t[i]][data.s[i]];
  }
  return cells;
}

inline std::vector<Eigen::Index> cell_indices(const Dataset& data, int t, int s) {
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (data.t[i] == t && data.s[i] == s) out.push_back(i);
  }
  return out;
}

namespace detail {

inline void check_dataset(const Dataset& data) {
  const Eigen::Index n = data.n();
  if (n < 1) throw Error(ErrorKind::bad_input, "dataset has no rows");
  if (data.dim() < 1) throw Error(ErrorKind::bad_input, "dataset has no covariate columns");
  if (static_cast<Eigen::Index>(data.t.size()) != n ||
      static_cast<Eigen::Index>(data.s.size()) != n || data.x.rows() != n) {
    throw Error(ErrorKind::bad_input, "column lengths disagree");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(data.y[i])) {
      throw Error(ErrorKind::non_finite_value, "y at row " + std::to_string(i));
    }
    if (data.t[i] != 0 && data.t[i] != 1) {
      throw Error(ErrorKind::non_binary_indicator, "t at row " + std::to_string(i));
    }
    if (data.s[i] != 0 && data.s[i] != 1) {
      throw Error(ErrorKind::non_binary_indicator, "s at row " + std::to_string(i));
    }
    for (Eigen::Index j = 0; j < data.dim(); ++j) {
      if (!std::isfinite(data.x(i, j))) {
        throw Error(ErrorKind::non_finite_value,
                    "x" + std::to_string(j + 1) + " at row " + std::to_string(i));
      }
    }
  }
  auto check_propensity = [n](const std::vector<double>& v, const char* name) {
    if (v.empty()) return;
    if (static_cast<Eigen::Index>(v.size()) != n) {
      throw Error(ErrorKind::bad_input, std::string(name) + " length disagrees with n");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!std::isfinite(v[i]) || v[i] <= 0.0 || v[i] >= 1.0) {
        throw Error(ErrorKind::propensity_out_of_range,
                    std::string(name) + " at row " + std::to_string(i));
      }
    }
  };
  check_propensity(data.known_e_exp, "e_exp");
  check_propensity(data.known_p, "p_samp");
}

}  // namespace detail

/// Checks all structural invariants and returns the dataset unchanged.
inline Dataset validate_dataset(Dataset data) {
  detail::check_dataset(data);
  return data;
}

/// Assembles and validates a dataset from a raw column table. The expected
/// header is y,t,s,x1..xd with optional trailing e_exp and p_samp columns.
/// Cell emptiness is not an error here: which (t,s) cells an analysis needs
/// depends on the treatment levels it is run for, so the operations that
/// consume cells perform those checks themselves.
inline Dataset validate_dataset(const RawTable& table) {
  const std::size_t ncols = table.names.size();
  if (table.columns.size() != ncols) {
    throw Error(ErrorKind::bad_input, "table names/columns disagree");
  }
  if (ncols < 4 || table.names[0] != "y" || table.names[1] != "t" ||
      table.names[2] != "s") {
    throw Error(ErrorKind::bad_input, "header must start with y,t,s,x1,...");
  }
  std::size_t col = 3;
  std::size_t d = 0;
  while (col < ncols && table.names[col] == "x" + std::to_string(d + 1)) {
    ++d;
    ++col;
  }
  if (d == 0) throw Error(ErrorKind::bad_input, "no covariate columns x1..xd");
  bool has_e = col < ncols && table.names[col] == "e_exp";
  if (has_e) ++col;
  bool has_p = col < ncols && table.names[col] == "p_samp";
  if (has_p) ++col;
  if (col != ncols) {
    throw Error(ErrorKind::bad_input, "unexpected column '" + table.names[col] + "'");
  }

  const std::size_t n = table.columns[0].size();
  if (n == 0) throw Error(ErrorKind::bad_input, "dataset has no rows");
  for (const auto& c : table.columns) {
    if (c.size() != n) throw Error(ErrorKind::bad_input, "ragged columns");
  }

  Dataset data;
  data.y.resize(static_cast<Eigen::Index>(n));
  data.t.resize(n);
  data.s.resize(n);
  data.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  auto to_indicator = [](double v, const char* name, std::size_t row) {
    if (v == 0.0) return 0;
    if (v == 1.0) return 1;
    throw Error(ErrorKind::non_binary_indicator,
                std::string(name) + " at row " + std::to_string(row));
  };
  for (std::size_t i = 0; i < n; ++i) {
    data.y[static_cast<Eigen::Index>(i)] = table.columns[0][i];
    double tv = table.columns[1][i];
    double sv = table.columns[2][i];
    if (!std::isfinite(tv) || !std::isfinite(sv)) {
      throw Error(ErrorKind::non_finite_value, "t/s at row " + std::to_string(i));
    }
    data.t[i] = to_indicator(tv, "t", i);
    data.s[i] = to_indicator(sv, "s", i);
    for (std::size_t j = 0; j < d; ++j) {
      data.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          table.columns[3 + j][i];
    }
  }
  if (has_e) data.known_e_exp = table.columns[3 + d];
  if (has_p) data.known_p = table.columns[3 + d + (has_e ? 1 : 0)];

  detail::check_dataset(data);
  return data;
}

inline RawTable to_table(const Dataset& data) {
  RawTable table;
  const std::size_t n = static_cast<std::size_t>(data.n());
  table.names = {"y", "t", "s"};
  table.columns.resize(3);
  for (std::size_t i = 0; i < n; ++i) {
    table.columns[0].push_back(data.y[static_cast<Eigen::Index>(i)]);
    table.columns[1].push_back(static_cast<double>(data.t[i]));
    table.columns[2].push_back(static_cast<double>(data.s[i]));
  }
  for (Eigen::Index j = 0; j < data.dim(); ++j) {
    table.names.push_back("x" + std::to_string(j + 1));
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = data.x(static_cast<Eigen::Index>(i), j);
    table.columns.push_back(std::move(col));
  }
  if (data.has_known_e_exp()) {
    table.names.push_back("e_exp");
    table.columns.push_back(data.known_e_exp);
  }
  if (data.has_known_p()) {
    table.names.push_back("p_samp");
    table.columns.push_back(data.known_p);
  }
  return table;
}

}  // namespace fusedml
