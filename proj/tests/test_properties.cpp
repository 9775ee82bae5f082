#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fusedml/inference.hpp"
#include "fusedml/math.hpp"
#include "fusedml/parallel.hpp"
#include "fusedml/simulate.hpp"
#include "oracle_support.hpp"

using namespace fusedml;
using fusedml::testing::CellEnumeration;

TEST_CASE("gap scores with oracle nuisances are mean zero under the null") {
  const int reps = 200;
  const long n = 400;
  for (int level = 0; level < 2; ++level) {
    std::vector<double> estimates(reps);
    parallel_for(reps, [&](std::size_t r) {
      SimulatedData sim =
          generate({DgpKind::efficiency, n, mix_seed(101, r)});
      NuisanceEstimates oracle = oracle_nuisances(DgpKind::efficiency, sim.data);
      ScoreVector phi = gap_scores(sim.data, oracle, level);
      estimates[r] = mean(phi.values);
    });
    double grand = mean(estimates);
    double mc_se = std::sqrt(sample_variance(estimates) / reps);
    INFO("level " << level << ": mean " << grand << " se " << mc_se);
    REQUIRE(std::abs(grand) <= 4.0 * mc_se);
  }
}

TEST_CASE("outcome-mean scores with oracle nuisances recover the truth") {
  const int reps = 200;
  const long n = 400;
  // Fusion generator: E[Y(1)] = 4, E[Y(0)] = 3.
  const double truth[2] = {3.0, 4.0};
  for (int level = 0; level < 2; ++level) {
    std::vector<double> estimates(reps);
    parallel_for(reps, [&](std::size_t r) {
      SimulatedData sim = generate({DgpKind::fusion, n, mix_seed(202, r)});
      NuisanceEstimates oracle = oracle_nuisances(DgpKind::fusion, sim.data);
      ScoreVector lam = outcome_mean_scores(sim.data, oracle, level);
      estimates[r] = mean(lam.values);
    });
    double grand = mean(estimates);
    double mc_se = std::sqrt(sample_variance(estimates) / reps);
    INFO("level " << level << ": mean " << grand << " se " << mc_se);
    REQUIRE(std::abs(grand - truth[level]) <= 4.0 * mc_se);
  }
}

TEST_CASE("mean scores are second order in nuisance perturbations") {
  SimulatedData draws = generate({DgpKind::efficiency, 500, 7});
  CellEnumeration cells =
      fusedml::testing::enumerate_cells(DgpKind::efficiency, draws.data);

  const std::vector<double> deltas{0.1, 0.05, 0.025};
  for (ScoreKind kind : {ScoreKind::gap, ScoreKind::outcome_mean}) {
    std::vector<double> forward, central;
    for (double d : deltas) {
      forward.push_back(fusedml::testing::forward_slope(cells, kind, 1, d));
      central.push_back(fusedml::testing::central_slope(cells, kind, 1, d));
    }
    INFO("forward slopes " << forward[0] << " " << forward[1] << " " << forward[2]);
    INFO("central slopes " << central[0] << " " << central[1] << " " << central[2]);
    // Forward-difference slopes decay linearly in delta.
    REQUIRE(forward[1] / forward[0] == Catch::Approx(0.5).margin(0.15));
    REQUIRE(forward[2] / forward[1] == Catch::Approx(0.5).margin(0.15));
    // Central-difference slopes are bounded by a line through the first
    // point and decay at least as fast.
    double c = 4.0 * central[0] / deltas[0];
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      REQUIRE(central[i] <= c * deltas[i]);
    }
    REQUIRE(central[1] <= 0.65 * central[0]);
    REQUIRE(central[2] <= 0.65 * central[1]);
  }
}

TEST_CASE("empirical bias concentrates around zero as n grows") {
  // At 50 replications the mean bias at either size is statistically zero
  // (its Monte Carlo SE dominates), so the identifiable property is that the
  // bias distribution stays centered at zero while its spread shrinks.
  const int reps = 50;
  CrossfitPlan plan;
  plan.folds = 5;
  auto bias_profile = [&](long n) {
    std::vector<double> biases(reps);
    parallel_for(reps, [&](std::size_t r) {
      SimulatedData sim = generate({DgpKind::fusion, n, mix_seed(303 + n, r)});
      CrossfitPlan rep_plan = plan;
      rep_plan.seed = mix_seed(404 + n, r);
      AteReport report = run_ate_estimate(sim.data, rep_plan, 0.05);
      biases[r] = report.ate - sim.true_tau;
    });
    double center = mean(biases);
    double spread = std::sqrt(sample_variance(biases));
    return std::pair<double, double>(center, spread);
  };
  auto [center_small, spread_small] = bias_profile(250);
  auto [center_large, spread_large] = bias_profile(2000);
  INFO("n=250 bias " << center_small << " spread " << spread_small);
  INFO("n=2000 bias " << center_large << " spread " << spread_large);
  REQUIRE(spread_large < spread_small);
  REQUIRE(std::abs(center_small) <= 4.0 * spread_small / std::sqrt(reps));
  REQUIRE(std::abs(center_large) <= 4.0 * spread_large / std::sqrt(reps));
}

TEST_CASE("repeated cross-fitting does not increase estimator spread") {
  const int data_reps = 50;
  const long n = 300;
  std::vector<double> single(data_reps), repeated(data_reps);
  parallel_for(data_reps, [&](std::size_t r) {
    SimulatedData sim = generate({DgpKind::fusion, n, mix_seed(505, r)});
    CrossfitPlan plan;
    plan.folds = 5;
    plan.seed = mix_seed(606, r);
    plan.repetitions = 1;
    single[r] = run_gap_estimate(sim.data, plan, 1, 0.05).estimate;
    plan.repetitions = 20;
    repeated[r] = run_gap_estimate(sim.data, plan, 1, 0.05).estimate;
  });
  double sd_single = std::sqrt(sample_variance(single));
  double sd_repeated = std::sqrt(sample_variance(repeated));
  INFO("sd single " << sd_single << " sd repeated " << sd_repeated);
  REQUIRE(sd_repeated <= sd_single);
}

TEST_CASE("fusion benchmark reproduces the mse ordering") {
  CrossfitPlan plan;
  plan.folds = 5;
  plan.seed = 42;
  DgpConfig cfg{DgpKind::fusion, 2000, 7};
  BenchmarkReport report = run_benchmark(
      cfg, {2000}, 10,
      {EstimatorKind::dml_fusion, EstimatorKind::exp_aipw,
       EstimatorKind::exp_ipw_diff, EstimatorKind::obs_aipw},
      plan);
  const auto& estimators = report.cells[0].estimators;
  double dml = estimators[0].mse;
  INFO("mse dml " << dml << " exp_aipw " << estimators[1].mse << " exp_ipw "
                  << estimators[2].mse << " obs " << estimators[3].mse);
  REQUIRE(estimators[0].failures == 0);
  REQUIRE(dml < estimators[1].mse);
  REQUIRE(dml < estimators[2].mse);
  for (const EstimatorSummary& s : estimators) {
    REQUIRE(std::isfinite(s.mse));
    REQUIRE(s.coverage >= 0.0);
    REQUIRE(s.coverage <= 1.0);
  }
}
