// Acceptance suite: end-to-end statistical checks on the synthetic
// generators, one printed pass/fail line per criterion. Exit status is the
// number of failed criteria.

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "fusedml/inference.hpp"
#include "fusedml/math.hpp"
#include "fusedml/parallel.hpp"
#include "fusedml/sensitivity.hpp"
#include "fusedml/simulate.hpp"
#include "oracle_support.hpp"

using namespace fusedml;

namespace {

int failures = 0;

void report(int number, const std::string& name, bool pass,
            const std::string& detail) {
  std::printf("%s criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", number,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* format, ...) {
  char buffer[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buffer, sizeof(buffer), format, args);
  va_end(args);
  return buffer;
}

// 1. Null calibration: fusion generator satisfies the tested assumptions, so
//    the level-1 gap test at nominal 5% must reject at a rate in [0.01, 0.11]
//    over 200 replications at n=1000, K=5.
void criterion_null_calibration() {
  const int reps = 200;
  std::vector<double> rejected(reps, 0.0);
  parallel_for(reps, [&](std::size_t r) {
    SimulatedData sim = generate({DgpKind::fusion, 1000, mix_seed(1001, r)});
    CrossfitPlan plan;
    plan.folds = 5;
    plan.seed = mix_seed(2001, r);
    GapReport gap = run_gap_estimate(sim.data, plan, 1, 0.05);
    rejected[r] = gap.p_value < 0.05 ? 1.0 : 0.0;
  });
  double rate = mean(rejected);
  report(1, "null calibration of the gap test", rate >= 0.01 && rate <= 0.11,
         fmt("rejection rate %.3f, bounds [0.01, 0.11]", rate));
}

// 2. ATE recovery: fusion at n=2000, 10 replications; mean estimate within
//    0.15 of the true value 1.0 and 95% CI coverage in at least 8.
void criterion_ate_recovery() {
  const int reps = 10;
  std::vector<double> estimates(reps);
  std::vector<char> covered(reps, 0);
  parallel_for(reps, [&](std::size_t r) {
    SimulatedData sim = generate({DgpKind::fusion, 2000, mix_seed(1002, r)});
    CrossfitPlan plan;
    plan.folds = 5;
    plan.seed = mix_seed(2002, r);
    AteReport ate = run_ate_estimate(sim.data, plan, 0.05);
    estimates[r] = ate.ate;
    covered[r] = ate.ci_low <= 1.0 && 1.0 <= ate.ci_high;
  });
  double center = mean(estimates);
  int hits = 0;
  for (char c : covered) hits += c;
  bool pass = std::abs(center - 1.0) <= 0.15 && hits >= 8;
  report(2, "ate recovery on the fusion generator", pass,
         fmt("mean ate %.4f (target 1.0 +- 0.15), coverage %d/10", center, hits));
}

// 3. MSE ordering: the fused estimator beats the experimental-only AIPW and
//    the experimental difference in means at n=2000 over 10 replications.
void criterion_mse_ordering() {
  CrossfitPlan plan;
  plan.folds = 5;
  plan.seed = 33;
  BenchmarkReport bench = run_benchmark(
      {DgpKind::fusion, 2000, 13}, {2000}, 10,
      {EstimatorKind::dml_fusion, EstimatorKind::exp_aipw,
       EstimatorKind::exp_ipw_diff},
      plan);
  const auto& est = bench.cells[0].estimators;
  bool pass = est[0].failures == 0 && est[0].mse < est[1].mse &&
              est[0].mse < est[2].mse;
  report(3, "mse ordering against experimental baselines", pass,
         fmt("mse fused %.4f, exp aipw %.4f, exp diff-means %.4f", est[0].mse,
             est[1].mse, est[2].mse));
}

// 4. Efficiency: on the equal-split generator the fused estimator's reported
//    SE beats the experimental IPW/diff-means SE in at least 90% of 100
//    replications at n=2000, and median SEs shrink with n.
void criterion_efficiency() {
  const int reps = 100;
  const std::vector<long> sizes{500, 1000, 2000};
  std::vector<double> dml_median(sizes.size()), ipw_median(sizes.size());
  int wins = 0;
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    std::vector<double> dml_se(reps), ipw_se(reps);
    parallel_for(reps, [&](std::size_t r) {
      SimulatedData sim =
          generate({DgpKind::efficiency, sizes[s], mix_seed(1004 + s, r)});
      CrossfitPlan plan;
      plan.folds = 5;
      plan.seed = mix_seed(2004 + s, r);
      AteReport fused = run_ate_estimate(sim.data, plan, 0.05);
      AteReport ipw = experimental_diff_means(sim.data);
      dml_se[r] = fused.se;
      ipw_se[r] = ipw.se;
    });
    dml_median[s] = median(dml_se);
    ipw_median[s] = median(ipw_se);
    if (sizes[s] == 2000) {
      for (int r = 0; r < reps; ++r) wins += dml_se[r] < ipw_se[r];
    }
  }
  bool shrinking = dml_median[0] > dml_median[1] && dml_median[1] > dml_median[2] &&
                   ipw_median[0] > ipw_median[1] && ipw_median[1] > ipw_median[2];
  bool pass = wins >= 90 && shrinking;
  report(4, "reported-se efficiency", pass,
         fmt("se wins %d/100; fused medians %.4f/%.4f/%.4f, ipw medians "
             "%.4f/%.4f/%.4f",
             wins, dml_median[0], dml_median[1], dml_median[2], ipw_median[0],
             ipw_median[1], ipw_median[2]));
}

// 5. Power: on the confounded generator the joint test's rejection rate is
//    nondecreasing in the confounding strength and reaches 80% at strength 2.
void criterion_power() {
  const int reps = 100;
  const std::vector<double> strengths{0.0, 0.5, 1.0, 2.0};
  std::vector<double> rates(strengths.size());
  for (std::size_t k = 0; k < strengths.size(); ++k) {
    std::vector<double> rejected(reps, 0.0);
    parallel_for(reps, [&](std::size_t r) {
      SimulatedData sim = generate(
          {DgpKind::confounded, 2000, mix_seed(1005 + k, r), strengths[k]});
      CrossfitPlan plan;
      plan.folds = 5;
      plan.seed = mix_seed(2005 + k, r);
      AssumptionTestReport test = run_assumption_test(
          sim.data, plan, {0, 1}, 0.05, Correction::bonferroni);
      rejected[r] = test.reject_joint ? 1.0 : 0.0;
    });
    rates[k] = mean(rejected);
  }
  bool monotone = rates[0] <= rates[1] && rates[1] <= rates[2] && rates[2] <= rates[3];
  bool pass = monotone && rates[3] >= 0.8;
  report(5, "test power under growing confounding", pass,
         fmt("rejection rates %.2f/%.2f/%.2f/%.2f across strengths 0/0.5/1/2",
             rates[0], rates[1], rates[2], rates[3]));
}

// 6. Orthogonality: the finite-difference derivative of the mean score under
//    a nuisance perturbation halves (within 30%) when the step halves from
//    0.1 to 0.05, for both score kinds, on an oracle-nuisance fixture.
void criterion_orthogonality() {
  SimulatedData draws = generate({DgpKind::efficiency, 500, 21});
  fusedml::testing::CellEnumeration cells =
      fusedml::testing::enumerate_cells(DgpKind::efficiency, draws.data);
  double gap_ratio =
      fusedml::testing::forward_slope(cells, ScoreKind::gap, 1, 0.05) /
      fusedml::testing::forward_slope(cells, ScoreKind::gap, 1, 0.1);
  double outcome_ratio =
      fusedml::testing::forward_slope(cells, ScoreKind::outcome_mean, 1, 0.05) /
      fusedml::testing::forward_slope(cells, ScoreKind::outcome_mean, 1, 0.1);
  bool pass = std::abs(gap_ratio - 0.5) <= 0.15 && std::abs(outcome_ratio - 0.5) <= 0.15;
  report(6, "second-order nuisance sensitivity", pass,
         fmt("slope ratios: gap %.3f, outcome %.3f (target 0.5 +- 0.15)",
             gap_ratio, outcome_ratio));
}

// 7. Double robustness: corrupting one nuisance leg (constant outcome model,
//    or constant propensities at the correct marginals) leaves the ATE within
//    4 Monte Carlo standard errors of 1.0 over 50 replications each.
void criterion_double_robustness() {
  const int reps = 50;
  auto corrupted_run = [&](bool corrupt_outcome) {
    std::vector<double> estimates(reps);
    parallel_for(reps, [&](std::size_t r) {
      SimulatedData sim = generate(
          {DgpKind::fusion, 2000, mix_seed(corrupt_outcome ? 1007 : 1008, r)});
      const Dataset& data = sim.data;
      FoldAssignment folds =
          assign_folds(data, 5, mix_seed(corrupt_outcome ? 2007 : 2008, r));
      NuisanceEstimates nuis = estimate_nuisances(
          data, folds, default_outcome_spec(), default_propensity_spec());
      const std::size_t n = nuis.n();
      if (corrupt_outcome) {
        double ybar = data.y.mean();
        for (int t = 0; t < 2; ++t) {
          for (int s = 0; s < 2; ++s) {
            nuis.mu[t][s].assign(n, ybar);
          }
        }
      } else {
        double sbar = 0.0, t_exp = 0.0, t_obs = 0.0;
        long n_exp = 0, n_obs = 0;
        for (std::size_t i = 0; i < n; ++i) {
          sbar += data.s[i];
          if (data.s[i] == 1) {
            t_exp += data.t[i];
            ++n_exp;
          } else {
            t_obs += data.t[i];
            ++n_obs;
          }
        }
        sbar /= static_cast<double>(n);
        t_exp = n_exp > 0 ? t_exp / n_exp : 0.5;
        t_obs = n_obs > 0 ? t_obs / n_obs : 0.5;
        const double eps = nuis.clip_epsilon;
        nuis.p.assign(n, clip(sbar, eps, 1.0 - eps));
        nuis.e[1][1].assign(n, clip(t_exp, eps, 1.0 - eps));
        nuis.e[0][1].assign(n, 1.0 - clip(t_exp, eps, 1.0 - eps));
        nuis.e[1][0].assign(n, clip(t_obs, eps, 1.0 - eps));
        nuis.e[0][0].assign(n, 1.0 - clip(t_obs, eps, 1.0 - eps));
      }
      estimates[r] = estimate_ate(data, nuis, 0.05).ate;
    });
    double center = mean(estimates);
    double mc_se = std::sqrt(sample_variance(estimates) / reps);
    return std::pair<double, double>(center, mc_se);
  };

  auto [mu_center, mu_se] = corrupted_run(true);
  auto [prop_center, prop_se] = corrupted_run(false);
  bool pass = std::abs(mu_center - 1.0) <= 4.0 * mu_se &&
              std::abs(prop_center - 1.0) <= 4.0 * prop_se;
  report(7, "double robustness to one corrupted nuisance leg", pass,
         fmt("constant outcome model: %.3f +- %.3f; constant propensities: "
             "%.3f +- %.3f (4 mc-se windows around 1.0)",
             mu_center, 4.0 * mu_se, prop_center, 4.0 * prop_se));
}

// 8. Breakdown-frontier recovery: with bias 5*(2T-1) injected into the
//    observational outcomes, the scan's peak lands in [3,7] in at least 80%
//    of 20 replications; without injection the non-rejection region covers 0.
void criterion_breakdown() {
  const int reps = 20;
  std::vector<double> grid;
  for (int g = 0; g <= 10; ++g) grid.push_back(g);
  std::vector<char> peak_ok(reps, 0), zero_ok(reps, 0);
  parallel_for(reps, [&](std::size_t r) {
    SimulatedData sim = generate({DgpKind::fusion, 2000, mix_seed(1009, r)});
    CrossfitPlan plan;
    plan.folds = 5;
    plan.seed = mix_seed(2009, r);

    Dataset biased = debias_outcomes(sim.data, -5.0);  // inject +5*(2T-1)
    SensitivityCurve curve = breakdown_scan(biased, 1, grid, plan, 0.05);
    peak_ok[r] = curve.peak_alpha >= 3.0 && curve.peak_alpha <= 7.0;

    SensitivityCurve null_curve = breakdown_scan(sim.data, 1, grid, plan, 0.05);
    zero_ok[r] = null_curve.has_non_rejection &&
                 null_curve.non_rejection_low <= 0.0 &&
                 null_curve.non_rejection_high >= 0.0;
  });
  int peaks = 0, zeros = 0;
  for (int r = 0; r < reps; ++r) {
    peaks += peak_ok[r];
    zeros += zero_ok[r];
  }
  bool pass = peaks >= 16 && zeros >= 16;
  report(8, "breakdown-frontier recovery", pass,
         fmt("peak in [3,7]: %d/20; zero inside non-rejection region: %d/20",
             peaks, zeros));
}

// 9. Exact score arithmetic: the hand-substituted examples evaluate to 5.0.
void criterion_exact_scores() {
  Dataset gap_data;
  gap_data.y.resize(1);
  gap_data.y[0] = 3.0;
  gap_data.t = {1};
  gap_data.s = {0};
  gap_data.x.resize(1, 1);
  gap_data.x(0, 0) = 0.0;
  NuisanceEstimates nuis;
  nuis.p.assign(1, 0.5);
  for (int t = 0; t < 2; ++t) {
    for (int s = 0; s < 2; ++s) {
      nuis.mu[t][s].assign(1, 0.0);
      nuis.e[t][s].assign(1, 0.5);
      nuis.has_mu[t][s] = true;
    }
  }
  nuis.has_e = {true, true};
  nuis.mu[1][0][0] = 2.0;
  nuis.mu[1][1][0] = 1.0;
  double gap = gap_scores(gap_data, nuis, 1).values[0];

  Dataset po_data = gap_data;
  po_data.y[0] = 2.0;
  po_data.s = {1};
  nuis.mu[1][0][0] = 1.0;
  double outcome = outcome_mean_scores(po_data, nuis, 1).values[0];

  bool pass = std::abs(gap - 5.0) <= 1e-12 && std::abs(outcome - 5.0) <= 1e-12;
  report(9, "exact hand-substituted scores", pass,
         fmt("gap score %.15f, outcome score %.15f (target 5.0)", gap, outcome));
}

}  // namespace

int main() {
  criterion_null_calibration();
  criterion_ate_recovery();
  criterion_mse_ordering();
  criterion_efficiency();
  criterion_power();
  criterion_orthogonality();
  criterion_double_robustness();
  criterion_breakdown();
  criterion_exact_scores();
  std::printf("%s: %d of 9 criteria failed\n", failures == 0 ? "OK" : "FAILED",
              failures);
  return failures;
}
