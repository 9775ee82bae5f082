// Command-line front end: ingest a fused-sample CSV (or draw synthetic data),
// run the cross-fitted assumption test / ATE estimate / breakdown scan /
// benchmark, and emit JSON reports plus plot-ready CSVs.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "fusedml/csv.hpp"
#include "fusedml/json_io.hpp"
#include "fusedml/run_config.hpp"
#include "fusedml/sensitivity.hpp"

namespace {

using namespace fusedml;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::bad_input, "cannot write '" + path + "'");
  out << text;
}

void emit_report(const RunConfig& cfg, const json& results) {
  json report{{"command", cfg.command}, {"config", cfg}, {"results", results}};
  std::string text = report.dump(2) + "\n";
  if (cfg.output.empty()) {
    std::cout << text;
  } else {
    write_text(cfg.output, text);
  }
}

Dataset load_input(const RunConfig& cfg) {
  if (cfg.input.empty()) {
    throw Error(ErrorKind::bad_input, "--input CSV is required");
  }
  return read_dataset_csv(cfg.input);
}

json cell_counts_json(const Dataset& data) {
  CellCounts cells = count_cells(data);
  return json{{"t0_s0", cells.at(0, 0)},
              {"t0_s1", cells.at(0, 1)},
              {"t1_s0", cells.at(1, 0)},
              {"t1_s1", cells.at(1, 1)}};
}

int run_test_command(const RunConfig& cfg) {
  Dataset data = load_input(cfg);
  CrossfitPlan plan = make_plan(cfg);
  AssumptionTestReport report = run_assumption_test(
      data, plan, cfg.levels, cfg.alpha_level, correction_from_name(cfg.correction));
  json results = report;
  results["cell_counts"] = cell_counts_json(data);
  emit_report(cfg, results);
  return 0;
}

int run_estimate_command(const RunConfig& cfg) {
  Dataset data = load_input(cfg);
  CrossfitPlan plan = make_plan(cfg);
  AteReport ate = run_ate_estimate(data, plan, cfg.alpha_level);
  json results{{"ate", ate}, {"cell_counts", cell_counts_json(data)}};
  if (cfg.baselines == "all") {
    ExperimentalBaselines exp = baseline_experimental_ate(data, plan, cfg.alpha_level);
    results["baselines"] = json{
        {"experimental_diff_means", exp.diff_means},
        {"experimental_aipw", exp.aipw},
        {"observational_aipw", run_observational_ate(data, plan, cfg.alpha_level)}};
  } else if (cfg.baselines != "none") {
    throw Error(ErrorKind::bad_input, "--baselines must be none or all");
  }
  emit_report(cfg, results);
  return 0;
}

int run_sensitivity_command(const RunConfig& cfg) {
  Dataset data = load_input(cfg);
  CrossfitPlan plan = make_plan(cfg);
  std::vector<double> grid = parse_grid(cfg.alpha_grid);
  SensitivityCurve curve =
      breakdown_scan(data, cfg.sensitivity_level, grid, plan, cfg.alpha_level);
  if (!cfg.curve_output.empty()) {
    std::ostringstream csv;
    csv << "alpha,p_value\n";
    for (std::size_t i = 0; i < curve.alphas.size(); ++i) {
      csv << detail::format_double(curve.alphas[i]) << ','
          << detail::format_double(curve.p_values[i]) << '\n';
    }
    write_text(cfg.curve_output, csv.str());
  }
  emit_report(cfg, json(curve));
  return 0;
}

int run_simulate_command(const RunConfig& cfg) {
  SimulatedData sim = generate(make_dgp(cfg));
  std::ostringstream csv;
  write_dataset_csv(sim.data, csv);
  if (cfg.output.empty()) {
    std::cout << csv.str();
  } else {
    write_text(cfg.output, csv.str());
  }
  return 0;
}

int run_benchmark_command(const RunConfig& cfg) {
  CrossfitPlan plan = make_plan(cfg);
  std::vector<EstimatorKind> estimators;
  for (const std::string& name : cfg.estimators) {
    estimators.push_back(estimator_kind_from_name(name));
  }
  BenchmarkReport report =
      run_benchmark(make_dgp(cfg), cfg.sizes, cfg.repeats, estimators, plan);
  if (!cfg.csv_output.empty()) {
    std::ostringstream csv;
    csv << "estimator,n,replication,estimate,se\n";
    for (const BenchmarkCell& cell : report.cells) {
      for (const EstimatorSummary& summary : cell.estimators) {
        for (std::size_t rep = 0; rep < summary.estimates.size(); ++rep) {
          if (!std::isfinite(summary.estimates[rep])) continue;
          csv << estimator_kind_name(summary.kind) << ',' << cell.n << ',' << rep
              << ',' << detail::format_double(summary.estimates[rep]) << ','
              << detail::format_double(summary.ses[rep]) << '\n';
        }
      }
    }
    write_text(cfg.csv_output, csv.str());
  }
  emit_report(cfg, json(report));
  return 0;
}

RunConfig preload_config(int argc, char** argv) {
  RunConfig cfg;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    std::string path;
    if (arg == "--config" && i + 1 < argc) {
      path = argv[i + 1];
    } else if (arg.rfind("--config=", 0) == 0) {
      path = arg.substr(9);
    } else {
      continue;
    }
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::bad_input, "cannot open config '" + path + "'");
    json parsed;
    try {
      in >> parsed;
    } catch (const json::exception& e) {
      throw Error(ErrorKind::bad_input, "config parse failure: " + std::string(e.what()));
    }
    parsed.get_to(cfg);
  }
  return cfg;
}

void add_crossfit_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--folds", cfg.folds, "cross-fitting folds K")->capture_default_str();
  sub->add_option("--repetitions", cfg.repetitions, "repeated cross-fitting count R")
      ->capture_default_str();
  sub->add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
  sub->add_option("--aggregation", cfg.aggregation, "mean|median across repetitions")
      ->capture_default_str();
  sub->add_option("--outcome-learner", cfg.outcome_learner, "ridge_linear|knn_regress")
      ->capture_default_str();
  sub->add_option("--outcome-lambda", cfg.outcome_lambda, "outcome L2 strength")
      ->capture_default_str();
  sub->add_option("--outcome-k", cfg.outcome_k, "outcome knn neighbors")
      ->capture_default_str();
  sub->add_option("--propensity-learner", cfg.propensity_learner,
                  "logistic|knn_classify")
      ->capture_default_str();
  sub->add_option("--propensity-lambda", cfg.propensity_lambda,
                  "propensity L2 strength")
      ->capture_default_str();
  sub->add_option("--propensity-k", cfg.propensity_k, "propensity knn neighbors")
      ->capture_default_str();
  sub->add_option("--clip", cfg.clip_epsilon, "propensity clipping epsilon")
      ->capture_default_str();
  sub->add_option("--config", "JSON file with a serialized run config");
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  try {
    cfg = preload_config(argc, argv);
  } catch (const Error& e) {
    std::cerr << json{{"error", {{"kind", e.kind_name()}, {"message", e.what()}}}}.dump()
              << "\n";
    return 2;
  }

  CLI::App app{"Fused experimental+observational analysis: assumption tests, "
               "doubly robust ATE estimation, breakdown-frontier scans, and "
               "synthetic benchmarks"};
  app.require_subcommand(1);

  CLI::App* test = app.add_subcommand(
      "test", "Test for violations of external validity or ignorability");
  test->add_option("--input", cfg.input, "dataset CSV");
  test->add_option("--output", cfg.output, "JSON report path (default stdout)");
  test->add_option("--levels", cfg.levels, "treatment levels to test")
      ->delimiter(',');
  test->add_option("--alpha-level", cfg.alpha_level, "test size")
      ->capture_default_str();
  test->add_option("--correction", cfg.correction, "none|bonferroni")
      ->capture_default_str();
  add_crossfit_options(test, cfg);

  CLI::App* estimate =
      app.add_subcommand("estimate", "Doubly robust population ATE estimate");
  estimate->add_option("--input", cfg.input, "dataset CSV");
  estimate->add_option("--output", cfg.output, "JSON report path (default stdout)");
  estimate->add_option("--alpha-level", cfg.alpha_level, "CI level complement")
      ->capture_default_str();
  estimate->add_option("--baselines", cfg.baselines, "none|all")
      ->capture_default_str();
  add_crossfit_options(estimate, cfg);

  CLI::App* sensitivity = app.add_subcommand(
      "sensitivity", "Breakdown-frontier scan over selection-bias magnitudes");
  sensitivity->add_option("--input", cfg.input, "dataset CSV");
  sensitivity->add_option("--output", cfg.output, "JSON summary path");
  sensitivity->add_option("--curve-output", cfg.curve_output,
                          "alpha,p_value CSV path");
  sensitivity->add_option("--level", cfg.sensitivity_level, "treatment level")
      ->capture_default_str();
  sensitivity->add_option("--grid", cfg.alpha_grid, "start:stop:step")
      ->capture_default_str();
  sensitivity->add_option("--alpha-level", cfg.alpha_level, "test size")
      ->capture_default_str();
  add_crossfit_options(sensitivity, cfg);

  CLI::App* simulate =
      app.add_subcommand("simulate", "Draw a synthetic dataset to CSV");
  simulate->add_option("--dgp", cfg.dgp, "fusion|efficiency|confounded")
      ->capture_default_str();
  simulate->add_option("--n", cfg.n, "sample size")->capture_default_str();
  simulate->add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
  simulate->add_option("--strength", cfg.confounding_strength,
                       "confounding strength (confounded dgp)")
      ->capture_default_str();
  simulate->add_flag("--with-propensities", cfg.with_propensities,
                     "emit e_exp and p_samp columns");
  simulate->add_option("--output", cfg.output, "CSV path (default stdout)");
  simulate->add_option("--config", "JSON file with a serialized run config");

  CLI::App* benchmark = app.add_subcommand(
      "benchmark", "Monte Carlo comparison of estimators on a synthetic dgp");
  benchmark->add_option("--dgp", cfg.dgp, "fusion|efficiency|confounded")
      ->capture_default_str();
  benchmark->add_option("--n", cfg.sizes, "sample sizes, comma separated")
      ->delimiter(',');
  benchmark->add_option("--repeats", cfg.repeats, "replications per size")
      ->capture_default_str();
  benchmark->add_option("--strength", cfg.confounding_strength,
                        "confounding strength (confounded dgp)")
      ->capture_default_str();
  benchmark->add_option("--estimators", cfg.estimators,
                        "subset of dml_fusion,exp_aipw,exp_ipw_diff,obs_aipw")
      ->delimiter(',');
  benchmark->add_option("--output", cfg.output, "JSON summary path");
  benchmark->add_option("--csv-output", cfg.csv_output,
                        "per-replication CSV path");
  add_crossfit_options(benchmark, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (test->parsed()) {
      cfg.command = "test";
      return run_test_command(cfg);
    }
    if (estimate->parsed()) {
      cfg.command = "estimate";
      return run_estimate_command(cfg);
    }
    if (sensitivity->parsed()) {
      cfg.command = "sensitivity";
      return run_sensitivity_command(cfg);
    }
    if (simulate->parsed()) {
      cfg.command = "simulate";
      return run_simulate_command(cfg);
    }
    if (benchmark->parsed()) {
      cfg.command = "benchmark";
      return run_benchmark_command(cfg);
    }
  } catch (const Error& e) {
    std::cerr << json{{"error", {{"kind", e.kind_name()}, {"message", e.what()}}}}.dump()
              << "\n";
    return e.input_error() ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"kind", "Internal"}, {"message", e.what()}}}}.dump()
              << "\n";
    return 3;
  }
  return 2;
}
