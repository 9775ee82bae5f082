#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "fusedml/crossfit.hpp"
#include "fusedml/dataset.hpp"
#include "fusedml/errors.hpp"
#include "fusedml/inference.hpp"
#include "fusedml/math.hpp"
#include "fusedml/parallel.hpp"

namespace fusedml {

enum class DgpKind { fusion, efficiency, confounded };

inline const char* dgp_kind_name(DgpKind kind) {
  switch (kind) {
    case DgpKind::fusion: return "fusion";
    case DgpKind::efficiency: return "efficiency";
    case DgpKind::confounded: return "confounded";
  }
  return "unknown";
}

inline DgpKind dgp_kind_from_name(const std::string& name) {
  if (name == "fusion") return DgpKind::fusion;
  if (name == "efficiency") return DgpKind::efficiency;
  if (name == "confounded") return DgpKind::confounded;
  throw Error(ErrorKind::bad_input, "unknown dgp '" + name + "'");
}

struct DgpConfig {
  DgpKind kind = DgpKind::fusion;
  long n = 1000;
  std::uint64_t seed = 1;
  double confounding_strength = 0.0;  // confounded kind only
  bool emit_propensities = false;     // include e_exp/p_samp columns
};

struct SimulatedData {
  Dataset data;
  double true_tau = 0.0;
};

/// Analytic ATE of each generator.
inline double true_tau_of(DgpKind kind) {
  return kind == DgpKind::efficiency ? 0.0 : 1.0;
}

namespace detail {

inline double bounded_prob(double p) {
  return clip(p, 1e-12, 1.0 - 1e-12);
}

}  // namespace detail

/// Fused-sample generator: five covariates N(1/2, 25), a quarter of units
/// sampled into the experiment, randomized treatment there, self-selected
/// treatment in the observational arm. True ATE is 1.
inline SimulatedData generate_fusion(long n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::bad_input, "n must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> covariate(0.5, 5.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  SimulatedData out;
  out.true_tau = 1.0;
  Dataset& d = out.data;
  d.y.resize(n);
  d.t.resize(static_cast<std::size_t>(n));
  d.s.resize(static_cast<std::size_t>(n));
  d.x.resize(n, 5);
  for (long i = 0; i < n; ++i) {
    for (int j = 0; j < 5; ++j) d.x(i, j) = covariate(rng);
    double x0 = d.x(i, 0), x1 = d.x(i, 1), x2 = d.x(i, 2), x3 = d.x(i, 3);
    double p = 0.5 * expit(x1 - x2);
    int s = unif(rng) < p ? 1 : 0;
    double e = s == 1 ? 0.5 : expit(x1 - x2);
    int t = unif(rng) < e ? 1 : 0;
    d.s[static_cast<std::size_t>(i)] = s;
    d.t[static_cast<std::size_t>(i)] = t;
    d.y[i] = x0 + 5.0 * x2 + t * (x1 + x3) + noise(rng);
  }
  return out;
}

/// Standard-normal covariate generator with a half/half sample split; both
/// arms share the outcome law Y = 5*X2 + X4 + T*(X1+X3) + N(0,1). True ATE
/// is 0.
inline SimulatedData generate_efficiency(long n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::bad_input, "n must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> covariate(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  SimulatedData out;
  out.true_tau = 0.0;
  Dataset& d = out.data;
  d.y.resize(n);
  d.t.resize(static_cast<std::size_t>(n));
  d.s.resize(static_cast<std::size_t>(n));
  d.x.resize(n, 4);
  for (long i = 0; i < n; ++i) {
    for (int j = 0; j < 4; ++j) d.x(i, j) = covariate(rng);
    double x1 = d.x(i, 0), x2 = d.x(i, 1), x3 = d.x(i, 2), x4 = d.x(i, 3);
    double p = expit(x1 - x2);
    int s = unif(rng) < p ? 1 : 0;
    double e = s == 1 ? 0.5 : expit(x1 + x2 - 2.0 * x3);
    int t = unif(rng) < e ? 1 : 0;
    d.s[static_cast<std::size_t>(i)] = s;
    d.t[static_cast<std::size_t>(i)] = t;
    d.y[i] = 5.0 * x2 + x4 + t * (x1 + x3) + noise(rng);
  }
  return out;
}

/// Fusion generator with a latent confounder U ~ N(0,1) added to the
/// observational treatment logit and to the outcome mean. U is dropped from
/// the emitted dataset; it is mean zero and not an effect modifier, so the
/// true ATE stays 1.
inline SimulatedData generate_confounded(long n, std::uint64_t seed,
                                         double strength) {
  if (n < 1) throw Error(ErrorKind::bad_input, "n must be >= 1");
  if (strength < 0.0) throw Error(ErrorKind::bad_input, "strength must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> covariate(0.5, 5.0);
  std::normal_distribution<double> standard(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  SimulatedData out;
  out.true_tau = 1.0;
  Dataset& d = out.data;
  d.y.resize(n);
  d.t.resize(static_cast<std::size_t>(n));
  d.s.resize(static_cast<std::size_t>(n));
  d.x.resize(n, 5);
  for (long i = 0; i < n; ++i) {
    for (int j = 0; j < 5; ++j) d.x(i, j) = covariate(rng);
    double x0 = d.x(i, 0), x1 = d.x(i, 1), x2 = d.x(i, 2), x3 = d.x(i, 3);
    double u = standard(rng);
    double p = 0.5 * expit(x1 - x2);
    int s = unif(rng) < p ? 1 : 0;
    double e = s == 1 ? 0.5 : expit(x1 - x2 + strength * u);
    int t = unif(rng) < e ? 1 : 0;
    d.s[static_cast<std::size_t>(i)] = s;
    d.t[static_cast<std::size_t>(i)] = t;
    d.y[i] = x0 + 5.0 * x2 + t * (x1 + x3) + strength * u + standard(rng);
  }
  return out;
}

inline SimulatedData generate(const DgpConfig& cfg) {
  SimulatedData out;
  switch (cfg.kind) {
    case DgpKind::fusion:
      out = generate_fusion(cfg.n, cfg.seed);
      break;
    case DgpKind::efficiency:
      out = generate_efficiency(cfg.n, cfg.seed);
      break;
    case DgpKind::confounded:
      out = generate_confounded(cfg.n, cfg.seed, cfg.confounding_strength);
      break;
  }
  if (cfg.emit_propensities) {
    Dataset& d = out.data;
    const std::size_t n = static_cast<std::size_t>(d.n());
    d.known_e_exp.resize(n, 0.5);  // treatment is a fair coin in the experiment
    d.known_p.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::Index r = static_cast<Eigen::Index>(i);
      double z = d.x(r, cfg.kind == DgpKind::efficiency ? 0 : 1) -
                 d.x(r, cfg.kind == DgpKind::efficiency ? 1 : 2);
      double p = cfg.kind == DgpKind::efficiency ? expit(z) : 0.5 * expit(z);
      d.known_p[i] = detail::bounded_prob(p);
    }
  }
  out.data = validate_dataset(std::move(out.data));
  return out;
}

/// True nuisance functions of a generator, evaluated at the dataset's own
/// covariates with the usual probability clipping. Supported for the kinds
/// whose nuisances are functions of X alone (not the confounded kind).
inline NuisanceEstimates oracle_nuisances(DgpKind kind, const Dataset& data,
                                          double clip_epsilon = 0.01) {
  if (kind == DgpKind::confounded) {
    throw Error(ErrorKind::bad_input,
                "confounded dgp has no observable oracle nuisances");
  }
  const std::size_t n = static_cast<std::size_t>(data.n());
  NuisanceEstimates nuis;
  nuis.clip_epsilon = clip_epsilon;
  nuis.p.resize(n);
  for (int t = 0; t < 2; ++t) {
    for (int s = 0; s < 2; ++s) {
      nuis.mu[t][s].resize(n);
      nuis.e[t][s].resize(n);
      nuis.has_mu[t][s] = true;
    }
  }
  nuis.has_e = {true, true};
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Index r = static_cast<Eigen::Index>(i);
    double mu0_base, mu_slope, e_obs, p;
    if (kind == DgpKind::fusion) {
      double x0 = data.x(r, 0), x1 = data.x(r, 1), x2 = data.x(r, 2),
             x3 = data.x(r, 3);
      mu0_base = x0 + 5.0 * x2;
      mu_slope = x1 + x3;
      e_obs = expit(x1 - x2);
      p = 0.5 * expit(x1 - x2);
    } else {
      double x1 = data.x(r, 0), x2 = data.x(r, 1), x3 = data.x(r, 2),
             x4 = data.x(r, 3);
      mu0_base = 5.0 * x2 + x4;
      mu_slope = x1 + x3;
      e_obs = expit(x1 + x2 - 2.0 * x3);
      p = expit(x1 - x2);
    }
    for (int t = 0; t < 2; ++t) {
      double mu = mu0_base + t * mu_slope;
      nuis.mu[t][0][i] = mu;
      nuis.mu[t][1][i] = mu;
    }
    double e1_obs = clip(e_obs, clip_epsilon, 1.0 - clip_epsilon);
    nuis.e[1][0][i] = e1_obs;
    nuis.e[0][0][i] = 1.0 - e1_obs;
    nuis.e[1][1][i] = 0.5;
    nuis.e[0][1][i] = 0.5;
    nuis.p[i] = clip(p, clip_epsilon, 1.0 - clip_epsilon);
  }
  return nuis;
}

// ---------------------------------------------------------------------------
// Monte Carlo benchmark harness.

enum class EstimatorKind { dml_fusion, exp_aipw, exp_ipw_diff, obs_aipw };

inline const char* estimator_kind_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::dml_fusion: return "dml_fusion";
    case EstimatorKind::exp_aipw: return "exp_aipw";
    case EstimatorKind::exp_ipw_diff: return "exp_ipw_diff";
    case EstimatorKind::obs_aipw: return "obs_aipw";
  }
  return "unknown";
}

inline EstimatorKind estimator_kind_from_name(const std::string& name) {
  if (name == "dml_fusion") return EstimatorKind::dml_fusion;
  if (name == "exp_aipw") return EstimatorKind::exp_aipw;
  if (name == "exp_ipw_diff") return EstimatorKind::exp_ipw_diff;
  if (name == "obs_aipw") return EstimatorKind::obs_aipw;
  throw Error(ErrorKind::bad_input, "unknown estimator '" + name + "'");
}

struct EstimatorSummary {
  EstimatorKind kind = EstimatorKind::dml_fusion;
  std::vector<double> estimates;  // NaN where the replication failed
  std::vector<double> ses;
  std::vector<char> covered;  // CI covered true_tau; bytes, written concurrently by index
  long failures = 0;
  double mse = 0.0;
  double mean_bias = 0.0;
  double mean_se = 0.0;
  double coverage = 0.0;
};

struct BenchmarkCell {
  long n = 0;
  std::vector<EstimatorSummary> estimators;
};

struct BenchmarkReport {
  DgpKind dgp = DgpKind::fusion;
  double true_tau = 0.0;
  int repeats = 0;
  std::uint64_t seed = 0;
  std::vector<BenchmarkCell> cells;
};

/// Generates fresh data per replication, runs every requested estimator end
/// to end, and accumulates bias/MSE/SE/coverage against the generator's true
/// ATE. Replications own RNG streams derived from (seed, stream index), so
/// the report is identical regardless of thread count.
inline BenchmarkReport run_benchmark(const DgpConfig& base,
                                     const std::vector<long>& sizes, int repeats,
                                     const std::vector<EstimatorKind>& estimators,
                                     const CrossfitPlan& plan) {
  if (repeats < 2) throw Error(ErrorKind::bad_input, "benchmark needs repeats >= 2");
  if (sizes.empty()) throw Error(ErrorKind::bad_input, "no sample sizes requested");
  if (estimators.empty()) throw Error(ErrorKind::bad_input, "no estimators requested");

  BenchmarkReport report;
  report.dgp = base.kind;
  report.repeats = repeats;
  report.seed = base.seed;
  report.true_tau = true_tau_of(base.kind);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t cell_idx = 0; cell_idx < sizes.size(); ++cell_idx) {
    BenchmarkCell cell;
    cell.n = sizes[cell_idx];
    for (EstimatorKind kind : estimators) {
      EstimatorSummary summary;
      summary.kind = kind;
      summary.estimates.assign(static_cast<std::size_t>(repeats), nan);
      summary.ses.assign(static_cast<std::size_t>(repeats), nan);
      summary.covered.assign(static_cast<std::size_t>(repeats), 0);
      cell.estimators.push_back(std::move(summary));
    }

    parallel_for(static_cast<std::size_t>(repeats), [&](std::size_t rep) {
      std::uint64_t stream = cell_idx * static_cast<std::size_t>(repeats) + rep;
      DgpConfig cfg = base;
      cfg.n = cell.n;
      cfg.seed = mix_seed(base.seed, 2 * stream);
      SimulatedData sim = generate(cfg);

      CrossfitPlan rep_plan = plan;
      rep_plan.seed = mix_seed(plan.seed, 2 * stream + 1);

      bool want_exp = false;
      for (const EstimatorSummary& s : cell.estimators) {
        if (s.kind == EstimatorKind::exp_aipw || s.kind == EstimatorKind::exp_ipw_diff) {
          want_exp = true;
        }
      }
      ExperimentalBaselines exp_base;
      bool exp_ok = false;
      if (want_exp) {
        try {
          exp_base = baseline_experimental_ate(sim.data, rep_plan);
          exp_ok = true;
        } catch (const Error&) {
        }
      }

      for (EstimatorSummary& summary : cell.estimators) {
        try {
          AteReport r;
          switch (summary.kind) {
            case EstimatorKind::dml_fusion:
              r = run_ate_estimate(sim.data, rep_plan, 0.05);
              break;
            case EstimatorKind::exp_aipw:
              if (!exp_ok) throw Error(ErrorKind::empty_cell, "experimental baseline failed");
              r = exp_base.aipw;
              break;
            case EstimatorKind::exp_ipw_diff:
              if (!exp_ok) throw Error(ErrorKind::empty_cell, "experimental baseline failed");
              r = exp_base.diff_means;
              break;
            case EstimatorKind::obs_aipw:
              r = run_observational_ate(sim.data, rep_plan, 0.05);
              break;
          }
          summary.estimates[rep] = r.ate;
          summary.ses[rep] = r.se;
          summary.covered[rep] = r.ci_low <= sim.true_tau && sim.true_tau <= r.ci_high;
        } catch (const Error&) {
          // left as NaN; counted below
        }
      }
    });

    for (EstimatorSummary& summary : cell.estimators) {
      double sq = 0.0, bias = 0.0, se = 0.0;
      long ok = 0, hits = 0;
      for (std::size_t rep = 0; rep < summary.estimates.size(); ++rep) {
        double est = summary.estimates[rep];
        if (!std::isfinite(est)) {
          ++summary.failures;
          continue;
        }
        ++ok;
        double dev = est - report.true_tau;
        sq += dev * dev;
        bias += dev;
        se += summary.ses[rep];
        if (summary.covered[rep]) ++hits;
      }
      if (ok > 0) {
        summary.mse = sq / ok;
        summary.mean_bias = bias / ok;
        summary.mean_se = se / ok;
        summary.coverage = static_cast<double>(hits) / ok;
      }
    }
    report.cells.push_back(std::move(cell));
  }
  return report;
}

}  // namespace fusedml
