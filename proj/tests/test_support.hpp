#pragma once

#include <random>
#include <vector>

#include "fusedml/dataset.hpp"

namespace fusedml::testing {

/// Builds a validated dataset from parallel rows.
inline Dataset make_dataset(const std::vector<double>& y,
                            const std::vector<int>& t,
                            const std::vector<int>& s,
                            const std::vector<std::vector<double>>& x) {
  Dataset d;
  const auto n = static_cast<Eigen::Index>(y.size());
  const auto dim = static_cast<Eigen::Index>(x.front().size());
  d.y.resize(n);
  d.t = t;
  d.s = s;
  d.x.resize(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    d.y[i] = y[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < dim; ++j) {
      d.x(i, j) = x[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return validate_dataset(d);
}

/// Random dataset with all four (t,s) cells populated (at least `per_cell`
/// units each) and a linear outcome.
inline Dataset random_complete_dataset(std::mt19937_64& rng, int per_cell,
                                       int extra = 0, int dim = 2) {
  std::normal_distribution<double> gauss;
  std::uniform_int_distribution<int> coin(0, 1);
  std::vector<double> y;
  std::vector<int> t, s;
  std::vector<std::vector<double>> x;
  auto push_unit = [&](int ti, int si) {
    std::vector<double> row(static_cast<std::size_t>(dim));
    for (auto& v : row) v = gauss(rng);
    double out = 1.0 + 2.0 * row[0] + ti * 0.5 + 0.3 * gauss(rng);
    y.push_back(out);
    t.push_back(ti);
    s.push_back(si);
    x.push_back(row);
  };
  for (int ti = 0; ti < 2; ++ti) {
    for (int si = 0; si < 2; ++si) {
      for (int k = 0; k < per_cell; ++k) push_unit(ti, si);
    }
  }
  for (int k = 0; k < extra; ++k) push_unit(coin(rng), coin(rng));
  return make_dataset(y, t, s, x);
}

}  // namespace fusedml::testing
