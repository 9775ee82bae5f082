#pragma once

#include <cmath>
#include <json.hpp>

#include "fusedml/inference.hpp"
#include "fusedml/run_config.hpp"
#include "fusedml/sensitivity.hpp"
#include "fusedml/simulate.hpp"

namespace fusedml {

using json = nlohmann::json;

namespace detail {

// JSON has no infinities; degenerate z statistics serialize as null.
inline json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace detail

inline void to_json(json& j, const GapReport& r) {
  j = json{{"level", r.level},
           {"n", r.n_units},
           {"estimate", r.estimate},
           {"score_var", r.score_var},
           {"null_var", r.null_var},
           {"z", detail::finite_or_null(r.z)},
           {"p_value", r.p_value},
           {"ci_low", r.ci_low},
           {"ci_high", r.ci_high},
           {"alpha", r.alpha},
           {"degenerate_variance", r.degenerate_variance}};
}

inline void to_json(json& j, const AteReport& r) {
  j = json{{"n", r.n_units},
           {"po_mean", {{"t0", r.po_mean[0]}, {"t1", r.po_mean[1]}}},
           {"po_var", {{"t0", r.po_var[0]}, {"t1", r.po_var[1]}}},
           {"ate", r.ate},
           {"ate_var", r.ate_var},
           {"se", r.se},
           {"ci_low", r.ci_low},
           {"ci_high", r.ci_high},
           {"alpha", r.alpha}};
}

inline void to_json(json& j, const AssumptionTestReport& r) {
  json levels = json::array();
  for (const LevelDecision& d : r.levels) {
    levels.push_back(json{{"level", d.report.level},
                          {"corrected_alpha", d.corrected_alpha},
                          {"reject", d.reject},
                          {"report", d.report}});
  }
  j = json{{"alpha", r.alpha},
           {"correction", r.correction == Correction::bonferroni ? "bonferroni" : "none"},
           {"levels", levels},
           {"reject_joint", r.reject_joint}};
}

inline void to_json(json& j, const SensitivityCurve& c) {
  json interval;
  if (c.has_non_rejection) {
    interval = json{{"low", c.non_rejection_low}, {"high", c.non_rejection_high}};
  } else {
    interval = nullptr;
  }
  j = json{{"level", c.level},
           {"alpha_level", c.alpha_level},
           {"alphas", c.alphas},
           {"p_values", c.p_values},
           {"non_rejection_interval", interval},
           {"peak_alpha", c.peak_alpha}};
}

inline void to_json(json& j, const BenchmarkReport& r) {
  json cells = json::array();
  for (const BenchmarkCell& cell : r.cells) {
    json estimators = json::array();
    for (const EstimatorSummary& s : cell.estimators) {
      estimators.push_back(json{{"name", estimator_kind_name(s.kind)},
                                {"mse", s.mse},
                                {"mean_bias", s.mean_bias},
                                {"mean_se", s.mean_se},
                                {"coverage", s.coverage},
                                {"failures", s.failures}});
    }
    cells.push_back(json{{"n", cell.n}, {"estimators", estimators}});
  }
  j = json{{"dgp", dgp_kind_name(r.dgp)},
           {"true_tau", r.true_tau},
           {"repeats", r.repeats},
           {"seed", r.seed},
           {"cells", cells}};
}

inline void to_json(json& j, const RunConfig& c) {
  j = json{{"command", c.command},
           {"input", c.input},
           {"output", c.output},
           {"curve_output", c.curve_output},
           {"csv_output", c.csv_output},
           {"folds", c.folds},
           {"repetitions", c.repetitions},
           {"seed", c.seed},
           {"aggregation", c.aggregation},
           {"outcome_learner", c.outcome_learner},
           {"outcome_lambda", c.outcome_lambda},
           {"outcome_k", c.outcome_k},
           {"propensity_learner", c.propensity_learner},
           {"propensity_lambda", c.propensity_lambda},
           {"propensity_k", c.propensity_k},
           {"clip_epsilon", c.clip_epsilon},
           {"alpha_level", c.alpha_level},
           {"correction", c.correction},
           {"levels", c.levels},
           {"sensitivity_level", c.sensitivity_level},
           {"alpha_grid", c.alpha_grid},
           {"dgp", c.dgp},
           {"n", c.n},
           {"sizes", c.sizes},
           {"confounding_strength", c.confounding_strength},
           {"with_propensities", c.with_propensities},
           {"repeats", c.repeats},
           {"estimators", c.estimators},
           {"baselines", c.baselines}};
}

inline void from_json(const json& j, RunConfig& c) {
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("command", c.command);
  get("input", c.input);
  get("output", c.output);
  get("curve_output", c.curve_output);
  get("csv_output", c.csv_output);
  get("folds", c.folds);
  get("repetitions", c.repetitions);
  get("seed", c.seed);
  get("aggregation", c.aggregation);
  get("outcome_learner", c.outcome_learner);
  get("outcome_lambda", c.outcome_lambda);
  get("outcome_k", c.outcome_k);
  get("propensity_learner", c.propensity_learner);
  get("propensity_lambda", c.propensity_lambda);
  get("propensity_k", c.propensity_k);
  get("clip_epsilon", c.clip_epsilon);
  get("alpha_level", c.alpha_level);
  get("correction", c.correction);
  get("levels", c.levels);
  get("sensitivity_level", c.sensitivity_level);
  get("alpha_grid", c.alpha_grid);
  get("dgp", c.dgp);
  get("n", c.n);
  get("sizes", c.sizes);
  get("confounding_strength", c.confounding_strength);
  get("with_propensities", c.with_propensities);
  get("repeats", c.repeats);
  get("estimators", c.estimators);
  get("baselines", c.baselines);
}

}  // namespace fusedml
