#pragma once

#include <string>
#include <vector>

#include "fusedml/dataset.hpp"
#include "fusedml/errors.hpp"
#include "fusedml/inference.hpp"
#include "fusedml/parallel.hpp"

namespace fusedml {

/// Breakdown-frontier scan result: the gap-test p-value as a function of the
/// assumed selection-bias magnitude.
struct SensitivityCurve {
  std::vector<double> alphas;
  std::vector<double> p_values;
  bool has_non_rejection = false;
  double non_rejection_low = 0.0;
  double non_rejection_high = 0.0;
  double peak_alpha = 0.0;
  int level = 1;
  double alpha_level = 0.05;
};

/// Removes a selection bias of the form bias(T) = alpha*(2T-1) from the
/// observational outcomes: treated S=0 units get alpha subtracted, control
/// S=0 units get alpha added. Experimental outcomes are untouched.
inline Dataset debias_outcomes(const Dataset& data, double alpha) {
  Dataset out = data;
  if (alpha == 0.0) return out;
  for (std::size_t i = 0; i < static_cast<std::size_t>(data.n()); ++i) {
    if (data.s[i] == 0) {
      out.y[static_cast<Eigen::Index>(i)] -= alpha * (2.0 * data.t[i] - 1.0);
    }
  }
  return out;
}

/// Re-runs the full cross-fitted gap test on outcomes debiased at each grid
/// point. Fold seeds are identical across the grid so the curve varies only
/// through the debiasing magnitude.
inline SensitivityCurve breakdown_scan(const Dataset& data, int level,
                                       const std::vector<double>& grid,
                                       const CrossfitPlan& plan,
                                       double alpha_level) {
  if (grid.empty()) throw Error(ErrorKind::bad_input, "empty alpha grid");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw Error(ErrorKind::bad_input, "alpha grid must be strictly ascending");
    }
  }
  SensitivityCurve curve;
  curve.alphas = grid;
  curve.p_values.assign(grid.size(), 0.0);
  curve.level = level;
  curve.alpha_level = alpha_level;

  parallel_for(grid.size(), [&](std::size_t g) {
    Dataset debiased = debias_outcomes(data, grid[g]);
    GapReport report = run_gap_estimate(debiased, plan, level, alpha_level);
    curve.p_values[g] = report.p_value;
  });

  bool any = false;
  std::size_t best = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (curve.p_values[g] >= alpha_level) {
      if (!any) {
        curve.non_rejection_low = grid[g];
        any = true;
      }
      curve.non_rejection_high = grid[g];
    }
    if (curve.p_values[g] > curve.p_values[best]) best = g;
  }
  curve.has_non_rejection = any;
  curve.peak_alpha = grid[best];
  return curve;
}

}  // namespace fusedml
