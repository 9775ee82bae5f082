#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fusedml/crossfit.hpp"
#include "fusedml/dataset.hpp"
#include "fusedml/errors.hpp"
#include "fusedml/math.hpp"

namespace fusedml {

enum class ScoreKind { gap, outcome_mean };

/// Per-unit influence-style scores for one treatment level.
struct ScoreVector {
  std::vector<double> values;
  int level = 1;
  ScoreKind kind = ScoreKind::gap;
};

/// Estimate and test report for the observational-vs-experimental outcome
/// gap at one treatment level. A nonzero gap indicates that external
/// validity or conditional ignorability fails.
struct GapReport {
  int level = 1;
  long n_units = 0;
  double estimate = 0.0;   // mean gap score
  double score_var = 0.0;  // variance of the gap scores
  double null_var = 0.0;   // residual-based variance valid under the null
  double z = 0.0;
  double p_value = 1.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double alpha = 0.05;
  bool degenerate_variance = false;
};

/// Doubly robust population ATE report.
struct AteReport {
  long n_units = 0;
  std::array<double, 2> po_mean{{0.0, 0.0}};  // mean potential outcome per level
  std::array<double, 2> po_var{{0.0, 0.0}};   // score variance per level
  double ate = 0.0;
  double ate_var = 0.0;  // variance of the per-unit ATE scores
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double alpha = 0.05;
};

enum class Correction { none, bonferroni };

struct LevelDecision {
  GapReport report;
  double corrected_alpha = 0.05;
  bool reject = false;
};

struct AssumptionTestReport {
  std::vector<LevelDecision> levels;
  double alpha = 0.05;
  Correction correction = Correction::bonferroni;
  bool reject_joint = false;
};

/// Gap score for treatment level t: the regression-difference term plus an
/// inverse-probability residual correction from whichever sample the unit
/// belongs to. Units with T != t contribute only the regression difference.
inline ScoreVector gap_scores(const Dataset& data, const NuisanceEstimates& nuis,
                              int t) {
  const std::size_t n = static_cast<std::size_t>(data.n());
  if (nuis.n() != n) {
    throw Error(ErrorKind::dimension_mismatch, "nuisances do not cover the dataset");
  }
  ScoreVector scores;
  scores.level = t;
  scores.kind = ScoreKind::gap;
  scores.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double mu0 = nuis.mu_at(i, t, 0);
    double mu1 = nuis.mu_at(i, t, 1);
    double value = mu0 - mu1;
    if (data.t[i] == t) {
      double y = data.y[static_cast<Eigen::Index>(i)];
      if (data.s[i] == 0) {
        value += (y - mu0) / (nuis.e_at(i, t, 0) * (1.0 - nuis.p[i]));
      } else {
        value -= (y - mu1) / (nuis.e_at(i, t, 1) * nuis.p[i]);
      }
    }
    scores.values[i] = value;
  }
  return scores;
}

/// Mean-potential-outcome score for level t: observational regression plus an
/// experimental-arm residual correction. Only units with S=1 and T=t carry a
/// correction term.
inline ScoreVector outcome_mean_scores(const Dataset& data,
                                       const NuisanceEstimates& nuis, int t) {
  const std::size_t n = static_cast<std::size_t>(data.n());
  if (nuis.n() != n) {
    throw Error(ErrorKind::dimension_mismatch, "nuisances do not cover the dataset");
  }
  ScoreVector scores;
  scores.level = t;
  scores.kind = ScoreKind::outcome_mean;
  scores.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double mu0 = nuis.mu_at(i, t, 0);
    double value = mu0;
    if (data.s[i] == 1 && data.t[i] == t) {
      double y = data.y[static_cast<Eigen::Index>(i)];
      value += (y - mu0) / (nuis.p[i] * nuis.e_at(i, t, 1));
    }
    scores.values[i] = value;
  }
  return scores;
}

inline GapReport estimate_gap(const ScoreVector& scores, const Dataset& data,
                              const NuisanceEstimates& nuis, double alpha) {
  if (scores.kind != ScoreKind::gap) {
    throw Error(ErrorKind::bad_input, "estimate_gap needs gap scores");
  }
  const std::size_t n = scores.values.size();
  if (n < 2) {
    throw Error(ErrorKind::zero_variance, "need at least 2 units for a variance");
  }
  const int t = scores.level;

  GapReport report;
  report.level = t;
  report.n_units = static_cast<long>(n);
  report.alpha = alpha;
  report.estimate = mean(scores.values);
  report.score_var = variance(scores.values);

  // Null-hypothesis variance: residuals against the observational regression
  // in both samples, squared and inverse-probability weighted.
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (data.t[i] != t) continue;
    double resid = data.y[static_cast<Eigen::Index>(i)] - nuis.mu_at(i, t, 0);
    double term;
    if (data.s[i] == 0) {
      term = resid / (nuis.e_at(i, t, 0) * (1.0 - nuis.p[i]));
    } else {
      term = resid / (nuis.e_at(i, t, 1) * nuis.p[i]);
    }
    acc += term * term;
  }
  report.null_var = acc / static_cast<double>(n);

  if (report.null_var > 0.0) {
    report.z = std::sqrt(static_cast<double>(n)) * report.estimate /
               std::sqrt(report.null_var);
    report.p_value = two_sided_p(report.z);
  } else {
    report.degenerate_variance = report.estimate != 0.0;
    report.z = report.estimate == 0.0
                   ? 0.0
                   : std::copysign(std::numeric_limits<double>::infinity(),
                                   report.estimate);
    report.p_value = report.estimate == 0.0 ? 1.0 : 0.0;
  }

  double q = normal_quantile(1.0 - alpha / 2.0);
  double half = q * std::sqrt(report.score_var / static_cast<double>(n));
  report.ci_low = report.estimate - half;
  report.ci_high = report.estimate + half;
  return report;
}

inline AteReport estimate_ate(const Dataset& data, const NuisanceEstimates& nuis,
                              double alpha) {
  const std::size_t n = static_cast<std::size_t>(data.n());
  ScoreVector s1 = outcome_mean_scores(data, nuis, 1);
  ScoreVector s0 = outcome_mean_scores(data, nuis, 0);

  AteReport report;
  report.n_units = static_cast<long>(n);
  report.alpha = alpha;
  report.po_mean[1] = mean(s1.values);
  report.po_mean[0] = mean(s0.values);
  report.po_var[1] = variance(s1.values);
  report.po_var[0] = variance(s0.values);
  report.ate = report.po_mean[1] - report.po_mean[0];

  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = s1.values[i] - s0.values[i] - report.ate;
    acc += d * d;
  }
  report.ate_var = acc / static_cast<double>(n);
  report.se = std::sqrt(report.ate_var / static_cast<double>(n));
  double q = normal_quantile(1.0 - alpha / 2.0);
  report.ci_low = report.ate - q * report.se;
  report.ci_high = report.ate + q * report.se;
  return report;
}

inline double corrected_alpha(double alpha, std::size_t tested,
                              Correction correction) {
  if (correction == Correction::bonferroni && tested > 1) {
    return alpha / static_cast<double>(tested);
  }
  return alpha;
}

/// Joint decision across treatment levels: reject if any level's p-value
/// falls below its multiplicity-corrected threshold.
inline AssumptionTestReport decide_assumption_test(
    const std::vector<GapReport>& reports, double alpha, Correction correction) {
  AssumptionTestReport out;
  out.alpha = alpha;
  out.correction = correction;
  double threshold = corrected_alpha(alpha, reports.size(), correction);
  for (const GapReport& r : reports) {
    LevelDecision d;
    d.report = r;
    d.corrected_alpha = threshold;
    d.reject = r.p_value < threshold;
    out.reject_joint = out.reject_joint || d.reject;
    out.levels.push_back(d);
  }
  return out;
}

inline AssumptionTestReport test_assumptions(const Dataset& data,
                                             const NuisanceEstimates& nuis,
                                             const std::vector<int>& levels,
                                             double alpha,
                                             Correction correction) {
  if (levels.empty()) throw Error(ErrorKind::bad_input, "no treatment levels requested");
  CellCounts cells = count_cells(data);
  for (int t : levels) {
    if (t != 0 && t != 1) throw Error(ErrorKind::bad_input, "levels must be 0 or 1");
    if (cells.at(t, 0) == 0 || cells.at(t, 1) == 0) {
      throw Error(ErrorKind::empty_cell,
                  "level " + std::to_string(t) +
                      " needs units in both samples with T=" + std::to_string(t));
    }
  }
  std::vector<GapReport> reports;
  for (int t : levels) {
    reports.push_back(estimate_gap(gap_scores(data, nuis, t), data, nuis, alpha));
  }
  return decide_assumption_test(reports, alpha, correction);
}

// ---------------------------------------------------------------------------
// Aggregation across cross-fitting repetitions. Point estimates combine by
// mean (or median); variances combine as the average per-repetition variance
// plus the spread of the point estimates across repetitions.

namespace detail {

inline double combine_var(const std::vector<double>& vars,
                          const std::vector<double>& points, double center,
                          Aggregation how) {
  std::vector<double> adjusted(vars.size());
  for (std::size_t r = 0; r < vars.size(); ++r) {
    double dev = points[r] - center;
    adjusted[r] = vars[r] + dev * dev;
  }
  return how == Aggregation::median ? median(adjusted) : mean(adjusted);
}

inline double combine_point(const std::vector<double>& points, Aggregation how) {
  return how == Aggregation::median ? median(points) : mean(points);
}

}  // namespace detail

inline GapReport aggregate(const std::vector<GapReport>& reps, Aggregation how) {
  if (reps.empty()) throw Error(ErrorKind::bad_input, "nothing to aggregate");
  if (reps.size() == 1) return reps.front();
  std::vector<double> points, score_vars, null_vars;
  for (const GapReport& r : reps) {
    points.push_back(r.estimate);
    score_vars.push_back(r.score_var);
    null_vars.push_back(r.null_var);
  }
  GapReport out = reps.front();
  out.estimate = detail::combine_point(points, how);
  out.score_var = detail::combine_var(score_vars, points, out.estimate, how);
  out.null_var = detail::combine_var(null_vars, points, out.estimate, how);
  const double n = static_cast<double>(out.n_units);
  if (out.null_var > 0.0) {
    out.z = std::sqrt(n) * out.estimate / std::sqrt(out.null_var);
    out.p_value = two_sided_p(out.z);
    out.degenerate_variance = false;
  } else {
    out.degenerate_variance = out.estimate != 0.0;
    out.z = out.estimate == 0.0
                ? 0.0
                : std::copysign(std::numeric_limits<double>::infinity(), out.estimate);
    out.p_value = out.estimate == 0.0 ? 1.0 : 0.0;
  }
  double q = normal_quantile(1.0 - out.alpha / 2.0);
  double half = q * std::sqrt(out.score_var / n);
  out.ci_low = out.estimate - half;
  out.ci_high = out.estimate + half;
  return out;
}

inline AteReport aggregate(const std::vector<AteReport>& reps, Aggregation how) {
  if (reps.empty()) throw Error(ErrorKind::bad_input, "nothing to aggregate");
  if (reps.size() == 1) return reps.front();
  AteReport out = reps.front();
  for (int t = 0; t < 2; ++t) {
    std::vector<double> points, vars;
    for (const AteReport& r : reps) {
      points.push_back(r.po_mean[t]);
      vars.push_back(r.po_var[t]);
    }
    out.po_mean[t] = detail::combine_point(points, how);
    out.po_var[t] = detail::combine_var(vars, points, out.po_mean[t], how);
  }
  std::vector<double> ates, vars;
  for (const AteReport& r : reps) {
    ates.push_back(r.ate);
    vars.push_back(r.ate_var);
  }
  out.ate = detail::combine_point(ates, how);
  out.ate_var = detail::combine_var(vars, ates, out.ate, how);
  const double n = static_cast<double>(out.n_units);
  out.se = std::sqrt(out.ate_var / n);
  double q = normal_quantile(1.0 - out.alpha / 2.0);
  out.ci_low = out.ate - q * out.se;
  out.ci_high = out.ate + q * out.se;
  return out;
}

// ---------------------------------------------------------------------------
// Cross-fitted drivers.

inline AssumptionTestReport run_assumption_test(const Dataset& data,
                                                const CrossfitPlan& plan,
                                                const std::vector<int>& levels,
                                                double alpha,
                                                Correction correction) {
  auto per_rep = repeat_crossfit(
      data, plan,
      [&](const Dataset& d, const NuisanceEstimates& nuis) {
        AssumptionTestReport r = test_assumptions(d, nuis, levels, alpha, correction);
        std::vector<GapReport> reports;
        for (const LevelDecision& lvl : r.levels) reports.push_back(lvl.report);
        return reports;
      });
  std::vector<GapReport> combined;
  for (std::size_t lvl = 0; lvl < levels.size(); ++lvl) {
    std::vector<GapReport> across;
    for (const auto& rep : per_rep) across.push_back(rep[lvl]);
    combined.push_back(aggregate(across, plan.aggregation));
  }
  return decide_assumption_test(combined, alpha, correction);
}

inline GapReport run_gap_estimate(const Dataset& data, const CrossfitPlan& plan,
                                  int level, double alpha) {
  auto per_rep = repeat_crossfit(
      data, plan, [&](const Dataset& d, const NuisanceEstimates& nuis) {
        return estimate_gap(gap_scores(d, nuis, level), d, nuis, alpha);
      });
  return aggregate(per_rep, plan.aggregation);
}

inline AteReport run_ate_estimate(const Dataset& data, const CrossfitPlan& plan,
                                  double alpha) {
  auto per_rep = repeat_crossfit(
      data, plan, [&](const Dataset& d, const NuisanceEstimates& nuis) {
        return estimate_ate(d, nuis, alpha);
      });
  return aggregate(per_rep, plan.aggregation);
}

// ---------------------------------------------------------------------------
// Baselines.

struct ExperimentalBaselines {
  AteReport diff_means;  // difference of arm means within the experiment
  AteReport aipw;        // AIPW restricted to the experimental sample
};

namespace detail {

inline Dataset experimental_subset(const Dataset& data) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (data.s[i] == 1) keep.push_back(i);
  }
  Dataset sub;
  sub.y.resize(static_cast<Eigen::Index>(keep.size()));
  sub.x.resize(static_cast<Eigen::Index>(keep.size()), data.dim());
  sub.t.resize(keep.size());
  sub.s.assign(keep.size(), 1);
  for (std::size_t r = 0; r < keep.size(); ++r) {
    sub.y[static_cast<Eigen::Index>(r)] = data.y[keep[r]];
    sub.x.row(static_cast<Eigen::Index>(r)) = data.x.row(keep[r]);
    sub.t[r] = data.t[static_cast<std::size_t>(keep[r])];
  }
  if (data.has_known_e_exp()) {
    for (Eigen::Index i : keep) {
      sub.known_e_exp.push_back(data.known_e_exp[static_cast<std::size_t>(i)]);
    }
  }
  return sub;
}

inline AteReport aipw_within_sample(const Dataset& data,
                                    const NuisanceEstimates& nuis, int s,
                                    double alpha) {
  std::vector<double> score1, score0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(data.n()); ++i) {
    if (data.s[i] != s) continue;
    double y = data.y[static_cast<Eigen::Index>(i)];
    double a1 = nuis.mu_at(i, 1, s);
    double a0 = nuis.mu_at(i, 0, s);
    if (data.t[i] == 1) {
      a1 += (y - a1) / nuis.e_at(i, 1, s);
    } else {
      a0 += (y - a0) / nuis.e_at(i, 0, s);
    }
    score1.push_back(a1);
    score0.push_back(a0);
  }
  if (score1.empty()) {
    throw Error(ErrorKind::empty_cell, "no units with S=" + std::to_string(s));
  }
  AteReport report;
  report.n_units = static_cast<long>(score1.size());
  report.alpha = alpha;
  report.po_mean[1] = mean(score1);
  report.po_mean[0] = mean(score0);
  report.po_var[1] = variance(score1);
  report.po_var[0] = variance(score0);
  report.ate = report.po_mean[1] - report.po_mean[0];
  std::vector<double> diffs(score1.size());
  for (std::size_t i = 0; i < score1.size(); ++i) diffs[i] = score1[i] - score0[i];
  report.ate_var = variance(diffs);
  report.se = std::sqrt(report.ate_var / static_cast<double>(report.n_units));
  double q = normal_quantile(1.0 - alpha / 2.0);
  report.ci_low = report.ate - q * report.se;
  report.ci_high = report.ate + q * report.se;
  return report;
}

}  // namespace detail

/// Difference of means across experimental arms, the classic randomized-trial
/// estimate. With a constant known design propensity this coincides with the
/// normalized IPW estimator.
inline AteReport experimental_diff_means(const Dataset& data, double alpha = 0.05) {
  std::vector<double> y1, y0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(data.n()); ++i) {
    if (data.s[i] != 1) continue;
    (data.t[i] == 1 ? y1 : y0).push_back(data.y[static_cast<Eigen::Index>(i)]);
  }
  if (y1.empty() || y0.empty()) {
    throw Error(ErrorKind::empty_cell, "experiment needs treated and control units");
  }
  AteReport report;
  report.n_units = static_cast<long>(y1.size() + y0.size());
  report.alpha = alpha;
  report.po_mean[1] = mean(y1);
  report.po_mean[0] = mean(y0);
  report.po_var[1] = sample_variance(y1);
  report.po_var[0] = sample_variance(y0);
  report.ate = report.po_mean[1] - report.po_mean[0];
  report.se = std::sqrt(report.po_var[1] / static_cast<double>(y1.size()) +
                        report.po_var[0] / static_cast<double>(y0.size()));
  report.ate_var = report.se * report.se * static_cast<double>(report.n_units);
  double q = normal_quantile(1.0 - alpha / 2.0);
  report.ci_low = report.ate - q * report.se;
  report.ci_high = report.ate + q * report.se;
  return report;
}

/// Experimental-only baselines: difference in means plus a cross-fitted AIPW
/// estimate on the S=1 subset.
inline ExperimentalBaselines baseline_experimental_ate(const Dataset& data,
                                                       const CrossfitPlan& plan,
                                                       double alpha = 0.05) {
  ExperimentalBaselines out;
  out.diff_means = experimental_diff_means(data, alpha);
  Dataset sub = detail::experimental_subset(data);
  auto per_rep = repeat_crossfit(
      sub, plan, [&](const Dataset& d, const NuisanceEstimates& nuis) {
        return detail::aipw_within_sample(d, nuis, 1, alpha);
      });
  out.aipw = aggregate(per_rep, plan.aggregation);
  return out;
}

/// Standard AIPW on the observational sample only, using the shared
/// cross-fitted nuisances.
inline AteReport baseline_observational_ate(const Dataset& data,
                                            const NuisanceEstimates& nuis,
                                            double alpha = 0.05) {
  CellCounts cells = count_cells(data);
  if (cells.at(0, 0) == 0 || cells.at(1, 0) == 0) {
    throw Error(ErrorKind::empty_cell,
                "observational sample needs both treatment cells");
  }
  return detail::aipw_within_sample(data, nuis, 0, alpha);
}

inline AteReport run_observational_ate(const Dataset& data,
                                       const CrossfitPlan& plan,
                                       double alpha = 0.05) {
  auto per_rep = repeat_crossfit(
      data, plan, [&](const Dataset& d, const NuisanceEstimates& nuis) {
        return baseline_observational_ate(d, nuis, alpha);
      });
  return aggregate(per_rep, plan.aggregation);
}

}  // namespace fusedml
