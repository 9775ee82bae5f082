#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fusedml/crossfit.hpp"
#include "fusedml/errors.hpp"
#include "fusedml/inference.hpp"
#include "fusedml/simulate.hpp"

namespace fusedml {

/// Fully serializable description of one CLI run. Every report embeds the
/// resolved config, so a run is reproducible from its own output.
struct RunConfig {
  std::string command;  // test | estimate | sensitivity | simulate | benchmark

  std::string input;        // dataset CSV (test/estimate/sensitivity)
  std::string output;       // JSON report path; empty = stdout
  std::string curve_output; // sensitivity curve CSV path
  std::string csv_output;   // simulate dataset CSV / benchmark detail CSV

  int folds = 5;
  int repetitions = 1;  // repeated cross-fitting count
  std::uint64_t seed = 1;
  std::string aggregation = "mean";

  std::string outcome_learner = "ridge_linear";
  double outcome_lambda = 1e-3;
  int outcome_k = 5;
  std::string propensity_learner = "logistic";
  double propensity_lambda = 1e-3;
  int propensity_k = 5;
  double clip_epsilon = 0.01;

  double alpha_level = 0.05;
  std::string correction = "bonferroni";
  std::vector<int> levels = {0, 1};

  int sensitivity_level = 1;
  std::string alpha_grid = "0:35:1";  // start:stop:step, inclusive

  std::string dgp = "fusion";
  long n = 1000;
  std::vector<long> sizes = {1000};
  double confounding_strength = 0.0;
  bool with_propensities = false;
  int repeats = 10;  // benchmark replications
  std::vector<std::string> estimators = {"dml_fusion", "exp_aipw", "exp_ipw_diff",
                                         "obs_aipw"};
  std::string baselines = "none";  // estimate command: none | all
};

inline LearnerKind learner_kind_from_name(const std::string& name) {
  if (name == "ridge_linear") return LearnerKind::ridge_linear;
  if (name == "logistic") return LearnerKind::logistic;
  if (name == "knn_regress") return LearnerKind::knn_regress;
  if (name == "knn_classify") return LearnerKind::knn_classify;
  throw Error(ErrorKind::bad_input, "unknown learner '" + name + "'");
}

inline Correction correction_from_name(const std::string& name) {
  if (name == "none") return Correction::none;
  if (name == "bonferroni") return Correction::bonferroni;
  throw Error(ErrorKind::bad_input, "unknown correction '" + name + "'");
}

inline Aggregation aggregation_from_name(const std::string& name) {
  if (name == "mean") return Aggregation::mean;
  if (name == "median") return Aggregation::median;
  throw Error(ErrorKind::bad_input, "unknown aggregation '" + name + "'");
}

inline CrossfitPlan make_plan(const RunConfig& cfg) {
  CrossfitPlan plan;
  plan.folds = cfg.folds;
  plan.repetitions = cfg.repetitions;
  plan.seed = cfg.seed;
  plan.aggregation = aggregation_from_name(cfg.aggregation);
  plan.outcome = LearnerSpec{learner_kind_from_name(cfg.outcome_learner),
                             cfg.outcome_lambda, cfg.outcome_k, cfg.clip_epsilon};
  plan.propensity =
      LearnerSpec{learner_kind_from_name(cfg.propensity_learner),
                  cfg.propensity_lambda, cfg.propensity_k, cfg.clip_epsilon};
  if (plan.outcome.kind == LearnerKind::logistic ||
      plan.outcome.kind == LearnerKind::knn_classify) {
    throw Error(ErrorKind::bad_input, "outcome learner must be a regressor");
  }
  if (plan.propensity.kind == LearnerKind::ridge_linear ||
      plan.propensity.kind == LearnerKind::knn_regress) {
    throw Error(ErrorKind::bad_input, "propensity learner must be a classifier");
  }
  return plan;
}

inline DgpConfig make_dgp(const RunConfig& cfg) {
  DgpConfig dgp;
  dgp.kind = dgp_kind_from_name(cfg.dgp);
  dgp.n = cfg.n;
  dgp.seed = cfg.seed;
  dgp.confounding_strength = cfg.confounding_strength;
  dgp.emit_propensities = cfg.with_propensities;
  return dgp;
}

/// Parses "start:stop:step" into an inclusive ascending grid.
inline std::vector<double> parse_grid(const std::string& text) {
  double start = 0.0, stop = 0.0, step = 1.0;
  auto first = text.find(':');
  auto second = text.find(':', first == std::string::npos ? 0 : first + 1);
  if (first == std::string::npos || second == std::string::npos) {
    throw Error(ErrorKind::bad_input, "grid must be start:stop:step");
  }
  try {
    start = std::stod(text.substr(0, first));
    stop = std::stod(text.substr(first + 1, second - first - 1));
    step = std::stod(text.substr(second + 1));
  } catch (const std::exception&) {
    throw Error(ErrorKind::bad_input, "cannot parse grid '" + text + "'");
  }
  if (!(step > 0.0) || stop < start) {
    throw Error(ErrorKind::bad_input, "grid needs step > 0 and stop >= start");
  }
  std::vector<double> grid;
  for (long k = 0;; ++k) {
    double v = start + step * static_cast<double>(k);
    if (v > stop + 1e-12 * std::max(1.0, std::abs(stop))) break;
    grid.push_back(v);
  }
  return grid;
}

}  // namespace fusedml
