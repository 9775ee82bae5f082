#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "fusedml/run_config.hpp"

namespace fs = std::filesystem;

namespace {

const std::string cli = FUSEDML_CLI_PATH;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

fs::path scratch_dir() {
  fs::path dir = fs::temp_directory_path() / "fusedml_cli_test";
  fs::create_directories(dir);
  return dir;
}

RunResult run(const std::string& args) {
  fs::path dir = scratch_dir();
  fs::path out = dir / "stdout.txt";
  fs::path err = dir / "stderr.txt";
  std::string command = cli + " " + args + " > " + out.string() + " 2> " + err.string();
  int status = std::system(command.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out);
  result.err = slurp(err);
  return result;
}

int count_lines(const std::string& text) {
  int lines = 0;
  for (char c : text) lines += c == '\n';
  return lines;
}

}  // namespace

TEST_CASE("simulate emits a csv with the expected shape") {
  RunResult r = run("simulate --dgp fusion --n 2000 --seed 1");
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.out.rfind("y,t,s,x1,x2,x3,x4,x5\n", 0) == 0);
  REQUIRE(count_lines(r.out) == 2001);  // header + 2000 rows
}

TEST_CASE("grid strings parse inclusively") {
  REQUIRE(fusedml::parse_grid("0:35:1").size() == 36);
  REQUIRE(fusedml::parse_grid("0:35:1").back() == 35.0);
  REQUIRE(fusedml::parse_grid("1.5:1.5:0.5") == std::vector<double>{1.5});
  REQUIRE(fusedml::parse_grid("0:1:0.25").size() == 5);
  REQUIRE_THROWS_AS(fusedml::parse_grid("5:4:1"), fusedml::Error);
  REQUIRE_THROWS_AS(fusedml::parse_grid("0:10:0"), fusedml::Error);
  REQUIRE_THROWS_AS(fusedml::parse_grid("not-a-grid"), fusedml::Error);
}

TEST_CASE("simulate with propensities adds the optional columns") {
  RunResult r = run("simulate --dgp efficiency --n 50 --seed 2 --with-propensities");
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.out.rfind("y,t,s,x1,x2,x3,x4,e_exp,p_samp\n", 0) == 0);
}

TEST_CASE("test command reports p-values and decisions deterministically") {
  fs::path dir = scratch_dir();
  fs::path data = dir / "fusion.csv";
  RunResult sim = run("simulate --dgp fusion --n 400 --seed 3 --output " + data.string());
  REQUIRE(sim.exit_code == 0);

  std::string flags = "test --input " + data.string() + " --folds 5 --seed 11";
  RunResult first = run(flags);
  RunResult second = run(flags);
  REQUIRE(first.exit_code == 0);
  REQUIRE(second.exit_code == 0);
  std::string text = first.out;
  REQUIRE(text == second.out);
  REQUIRE(text.find("\"p_value\"") != std::string::npos);
  REQUIRE(text.find("\"reject_joint\"") != std::string::npos);
  REQUIRE(text.find("\"cell_counts\"") != std::string::npos);
  REQUIRE(text.find("\"config\"") != std::string::npos);
}

TEST_CASE("estimate command emits the ate schema and baselines") {
  fs::path dir = scratch_dir();
  fs::path data = dir / "fusion_est.csv";
  REQUIRE(run("simulate --dgp fusion --n 400 --seed 4 --output " + data.string())
              .exit_code == 0);
  RunResult r = run("estimate --input " + data.string() + " --baselines all --seed 5");
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.out.find("\"ate\"") != std::string::npos);
  REQUIRE(r.out.find("\"ate_var\"") != std::string::npos);
  REQUIRE(r.out.find("\"experimental_diff_means\"") != std::string::npos);
  REQUIRE(r.out.find("\"experimental_aipw\"") != std::string::npos);
  REQUIRE(r.out.find("\"observational_aipw\"") != std::string::npos);
}

TEST_CASE("malformed csv exits 2 with a structured error") {
  fs::path dir = scratch_dir();
  fs::path bad = dir / "bad.csv";
  std::ofstream(bad) << "y,t,s,x1\n1.0,2,0,0.5\n";  // t=2
  RunResult r = run("test --input " + bad.string());
  REQUIRE(r.exit_code == 2);
  REQUIRE(r.err.find("NonBinaryIndicator") != std::string::npos);
}

TEST_CASE("missing input exits 2") {
  RunResult r = run("estimate --input /nonexistent/data.csv");
  REQUIRE(r.exit_code == 2);
}

TEST_CASE("numerical failures exit 3") {
  fs::path dir = scratch_dir();
  fs::path tiny = dir / "tiny.csv";
  std::ofstream(tiny) << "y,t,s,x1\n"
                      << "1,0,0,0.1\n2,1,0,0.2\n3,0,1,0.3\n4,1,1,0.4\n";
  RunResult r = run("test --input " + tiny.string() + " --folds 5");
  REQUIRE(r.exit_code == 3);
  REQUIRE(r.err.find("CellTooSmall") != std::string::npos);
}

TEST_CASE("single level test on controls-only observational data") {
  fs::path dir = scratch_dir();
  fs::path data = dir / "controls.csv";
  std::ofstream out(data);
  out << "y,t,s,x1\n";
  // Observational units are all controls; experiment has both arms.
  for (int i = 0; i < 40; ++i) {
    int s = i % 2;
    int t = s == 1 ? (i / 2) % 2 : 0;
    out << 0.1 * i << "," << t << "," << s << "," << 0.05 * i << "\n";
  }
  out.close();
  RunResult both = run("test --input " + data.string() + " --folds 2");
  REQUIRE(both.exit_code == 2);  // level 1 has no observational units
  RunResult single = run("test --input " + data.string() + " --folds 2 --levels 0");
  REQUIRE(single.exit_code == 0);
  REQUIRE(single.out.find("\"level\": 0") != std::string::npos);
}

TEST_CASE("sensitivity produces the curve csv") {
  fs::path dir = scratch_dir();
  fs::path data = dir / "sens.csv";
  REQUIRE(run("simulate --dgp fusion --n 300 --seed 6 --output " + data.string())
              .exit_code == 0);
  fs::path curve = dir / "curve.csv";
  RunResult r = run("sensitivity --input " + data.string() +
                    " --grid 0:3:1 --level 1 --seed 7 --curve-output " +
                    curve.string());
  REQUIRE(r.exit_code == 0);
  std::string text = slurp(curve);
  REQUIRE(text.rfind("alpha,p_value\n", 0) == 0);
  REQUIRE(count_lines(text) == 5);  // header + 4 grid points
  REQUIRE(r.out.find("\"peak_alpha\"") != std::string::npos);
}

TEST_CASE("degenerate sensitivity grid exits 2") {
  fs::path dir = scratch_dir();
  fs::path data = dir / "sens2.csv";
  REQUIRE(run("simulate --dgp fusion --n 300 --seed 8 --output " + data.string())
              .exit_code == 0);
  RunResult r = run("sensitivity --input " + data.string() + " --grid 5:4:1");
  REQUIRE(r.exit_code == 2);
}

TEST_CASE("benchmark emits summary json and detail csv deterministically") {
  fs::path dir = scratch_dir();
  fs::path csv = dir / "bench.csv";
  std::string flags =
      "benchmark --dgp fusion --n 250 --repeats 3 --seed 9 "
      "--estimators dml_fusion,exp_ipw_diff --csv-output " + csv.string();
  RunResult first = run(flags);
  REQUIRE(first.exit_code == 0);
  std::string detail = slurp(csv);
  RunResult second = run(flags);
  REQUIRE(second.exit_code == 0);
  REQUIRE(first.out == second.out);
  REQUIRE(detail == slurp(csv));
  REQUIRE(detail.rfind("estimator,n,replication,estimate,se\n", 0) == 0);
  REQUIRE(count_lines(detail) == 7);  // header + 2 estimators * 3 replications
  REQUIRE(first.out.find("\"true_tau\": 1.0") != std::string::npos);
}

TEST_CASE("config file supplies defaults that flags override") {
  fs::path dir = scratch_dir();
  fs::path cfg = dir / "config.json";
  std::ofstream(cfg) << R"({"dgp": "efficiency", "n": 60, "seed": 12})";
  RunResult r = run("simulate --config " + cfg.string());
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.out.rfind("y,t,s,x1,x2,x3,x4\n", 0) == 0);
  REQUIRE(count_lines(r.out) == 61);

  RunResult overridden = run("simulate --config " + cfg.string() + " --n 30");
  REQUIRE(overridden.exit_code == 0);
  REQUIRE(count_lines(overridden.out) == 31);
}

TEST_CASE("unknown flags exit 2") {
  RunResult r = run("estimate --frobnicate");
  REQUIRE(r.exit_code == 2);
}
