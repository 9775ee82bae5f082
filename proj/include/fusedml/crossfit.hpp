#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <type_traits>
#include <vector>

#include "fusedml/dataset.hpp"
#include "fusedml/errors.hpp"
#include "fusedml/learners.hpp"
#include "fusedml/math.hpp"

namespace fusedml {

enum class Aggregation { mean, median };

struct FoldAssignment {
  std::vector<int> fold_of;  // values in [0, folds)
  int folds = 0;
  std::uint64_t seed = 0;
};

/// Out-of-fold nuisance predictions for every unit. mu[t][s][i] estimates
/// E[Y|X=x_i,T=t,S=s]; e[t][s][i] estimates Pr(T=t|X=x_i,S=s); p[i] estimates
/// Pr(S=1|X=x_i). Entries for a globally empty (t,s) cell (or arm) are NaN
/// with the matching availability flag cleared. Every prediction for unit i
/// comes from models fit without unit i.
struct NuisanceEstimates {
  std::array<std::array<std::vector<double>, 2>, 2> mu;  // [t][s]
  std::array<std::array<std::vector<double>, 2>, 2> e;   // [t][s]
  std::vector<double> p;
  std::array<std::array<bool, 2>, 2> has_mu{{{false, false}, {false, false}}};
  std::array<bool, 2> has_e{false, false};
  bool e_exp_from_known = false;
  bool p_from_known = false;
  double clip_epsilon = 0.01;

  std::size_t n() const { return p.size(); }

  double mu_at(std::size_t i, int t, int s) const {
    if (!has_mu[t][s]) {
      throw Error(ErrorKind::missing_nuisance,
                  "mu(t=" + std::to_string(t) + ",s=" + std::to_string(s) +
                      ") unavailable (empty cell)");
    }
    return mu[t][s][i];
  }
  double e_at(std::size_t i, int t, int s) const {
    if (!has_e[s]) {
      throw Error(ErrorKind::missing_nuisance,
                  "e(.,s=" + std::to_string(s) + ") unavailable (empty arm)");
    }
    return e[t][s][i];
  }
};

/// Stratified fold assignment: units are shuffled once and dealt round-robin
/// within their (t,s) cell, so cell fold sizes differ by at most one and the
/// assignment depends only on (t, s, seed), never on outcomes.
inline FoldAssignment assign_folds(const Dataset& data, int folds,
                                   std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorKind::bad_input, "fold count must be >= 2");
  CellCounts cells = count_cells(data);
  for (int t = 0; t < 2; ++t) {
    for (int s = 0; s < 2; ++s) {
      long c = cells.at(t, s);
      if (c > 0 && c < folds) {
        throw Error(ErrorKind::cell_too_small,
                    "cell (t=" + std::to_string(t) + ",s=" + std::to_string(s) +
                        ") has " + std::to_string(c) + " units, needs >= " +
                        std::to_string(folds));
      }
    }
  }
  const std::size_t n = static_cast<std::size_t>(data.n());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  FoldAssignment assignment;
  assignment.folds = folds;
  assignment.seed = seed;
  assignment.fold_of.assign(n, -1);
  std::array<std::array<int, 2>, 2> next{{{0, 0}, {0, 0}}};
  for (std::size_t pos = 0; pos < n; ++pos) {
    std::size_t i = order[pos];
    int& counter = next[data.t[i]][data.s[i]];
    assignment.fold_of[i] = counter % folds;
    ++counter;
  }
  return assignment;
}

namespace detail {

inline Eigen::MatrixXd rows_of(const Eigen::MatrixXd& x,
                               const std::vector<std::size_t>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(idx[r]));
  }
  return out;
}

}  // namespace detail

inline NuisanceEstimates estimate_nuisances(const Dataset& data,
                                            const FoldAssignment& folds,
                                            const LearnerSpec& outcome_spec,
                                            const LearnerSpec& propensity_spec) {
  const std::size_t n = static_cast<std::size_t>(data.n());
  if (folds.fold_of.size() != n) {
    throw Error(ErrorKind::dimension_mismatch, "fold assignment does not match dataset");
  }
  const double eps = propensity_spec.clip_epsilon;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CellCounts cells = count_cells(data);

  NuisanceEstimates nuis;
  nuis.clip_epsilon = eps;
  nuis.p.assign(n, nan);
  for (int t = 0; t < 2; ++t) {
    for (int s = 0; s < 2; ++s) {
      nuis.mu[t][s].assign(n, nan);
      nuis.e[t][s].assign(n, nan);
      nuis.has_mu[t][s] = cells.at(t, s) > 0;
    }
  }
  nuis.has_e[0] = cells.at(0, 0) + cells.at(1, 0) > 0;
  nuis.has_e[1] = cells.at(0, 1) + cells.at(1, 1) > 0;

  for (int k = 0; k < folds.folds; ++k) {
    std::vector<std::size_t> test_idx;
    for (std::size_t i = 0; i < n; ++i) {
      if (folds.fold_of[i] == k) test_idx.push_back(i);
    }
    if (test_idx.empty()) continue;
    Eigen::MatrixXd test_x = detail::rows_of(data.x, test_idx);

    // Outcome regressions, one per populated (t,s) cell.
    for (int t = 0; t < 2; ++t) {
      for (int s = 0; s < 2; ++s) {
        if (!nuis.has_mu[t][s]) continue;
        std::vector<std::size_t> train;
        for (std::size_t i = 0; i < n; ++i) {
          if (folds.fold_of[i] != k && data.t[i] == t && data.s[i] == s) {
            train.push_back(i);
          }
        }
        if (train.empty()) {
          throw Error(ErrorKind::empty_training_cell,
                      "no training units for mu(t=" + std::to_string(t) +
                          ",s=" + std::to_string(s) + ") outside fold " +
                          std::to_string(k));
        }
        Eigen::VectorXd targets(static_cast<Eigen::Index>(train.size()));
        for (std::size_t r = 0; r < train.size(); ++r) {
          targets[static_cast<Eigen::Index>(r)] = data.y[static_cast<Eigen::Index>(train[r])];
        }
        FittedModel model =
            fit_regressor(detail::rows_of(data.x, train), targets, outcome_spec);
        Eigen::VectorXd pred = predict(model, test_x);
        for (std::size_t r = 0; r < test_idx.size(); ++r) {
          nuis.mu[t][s][test_idx[r]] = pred[static_cast<Eigen::Index>(r)];
        }
      }
    }

    // Treatment propensities, one classifier per populated arm; the t=0
    // probability is the complement since treatment is binary.
    for (int s = 0; s < 2; ++s) {
      if (!nuis.has_e[s]) continue;
      std::vector<std::size_t> train;
      for (std::size_t i = 0; i < n; ++i) {
        if (folds.fold_of[i] != k && data.s[i] == s) train.push_back(i);
      }
      if (train.empty()) {
        throw Error(ErrorKind::empty_training_cell,
                    "no training units for e(.,s=" + std::to_string(s) +
                        ") outside fold " + std::to_string(k));
      }
      std::vector<int> labels(train.size());
      for (std::size_t r = 0; r < train.size(); ++r) labels[r] = data.t[train[r]];
      FittedModel model =
          fit_classifier(detail::rows_of(data.x, train), labels, propensity_spec);
      Eigen::VectorXd pred = predict_proba(model, test_x);
      for (std::size_t r = 0; r < test_idx.size(); ++r) {
        double e1 = pred[static_cast<Eigen::Index>(r)];
        nuis.e[1][s][test_idx[r]] = e1;
        nuis.e[0][s][test_idx[r]] = 1.0 - e1;
      }
    }

    // Sampling propensity, fit on all out-of-fold units.
    {
      std::vector<std::size_t> train;
      for (std::size_t i = 0; i < n; ++i) {
        if (folds.fold_of[i] != k) train.push_back(i);
      }
      if (train.empty()) {
        throw Error(ErrorKind::empty_training_cell,
                    "no training units for p outside fold " + std::to_string(k));
      }
      std::vector<int> labels(train.size());
      for (std::size_t r = 0; r < train.size(); ++r) labels[r] = data.s[train[r]];
      FittedModel model =
          fit_classifier(detail::rows_of(data.x, train), labels, propensity_spec);
      Eigen::VectorXd pred = predict_proba(model, test_x);
      for (std::size_t r = 0; r < test_idx.size(); ++r) {
        nuis.p[test_idx[r]] = pred[static_cast<Eigen::Index>(r)];
      }
    }
  }

  // User-supplied propensities take precedence (clipped like predictions).
  if (data.has_known_e_exp()) {
    for (std::size_t i = 0; i < n; ++i) {
      double e1 = clip(data.known_e_exp[i], eps, 1.0 - eps);
      nuis.e[1][1][i] = e1;
      nuis.e[0][1][i] = 1.0 - e1;
    }
    nuis.has_e[1] = true;
    nuis.e_exp_from_known = true;
  }
  if (data.has_known_p()) {
    for (std::size_t i = 0; i < n; ++i) {
      nuis.p[i] = clip(data.known_p[i], eps, 1.0 - eps);
    }
    nuis.p_from_known = true;
  }
  return nuis;
}

/// Cross-fitting plan shared by every second-stage analysis.
struct CrossfitPlan {
  int folds = 5;
  int repetitions = 1;
  std::uint64_t seed = 1;
  Aggregation aggregation = Aggregation::mean;
  LearnerSpec outcome = default_outcome_spec();
  LearnerSpec propensity = default_propensity_spec();
};

inline std::uint64_t repetition_seed(const CrossfitPlan& plan, int rep) {
  return rep == 0 ? plan.seed : mix_seed(plan.seed, static_cast<std::uint64_t>(rep));
}

/// Runs fold assignment + nuisance estimation + a downstream estimator for
/// each repetition and returns the per-repetition results. Aggregation across
/// repetitions is report-specific (see aggregate() in inference.hpp).
template <typename Downstream>
auto repeat_crossfit(const Dataset& data, const CrossfitPlan& plan,
                     Downstream&& run)
    -> std::vector<std::invoke_result_t<Downstream&, const Dataset&,
                                        const NuisanceEstimates&>> {
  if (plan.repetitions < 1) {
    throw Error(ErrorKind::bad_input, "repetitions must be >= 1");
  }
  using Result =
      std::invoke_result_t<Downstream&, const Dataset&, const NuisanceEstimates&>;
  std::vector<Result> results;
  results.reserve(static_cast<std::size_t>(plan.repetitions));
  for (int rep = 0; rep < plan.repetitions; ++rep) {
    FoldAssignment folds = assign_folds(data, plan.folds, repetition_seed(plan, rep));
    NuisanceEstimates nuis =
        estimate_nuisances(data, folds, plan.outcome, plan.propensity);
    results.push_back(run(data, nuis));
  }
  return results;
}

}  // namespace fusedml
