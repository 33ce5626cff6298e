#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ccpower/errors.hpp"
#include "ccpower/experiment.hpp"

using namespace ccpower;
namespace fs = std::filesystem;

namespace {

const char* kPowerMin = R"(problem: powermin
scenario:
  K: 3
  M: 3
  kappa: 0.1
  eps: 0.05
  alpha: 1.0
  seed: 1
seeds: [1, 2]
solver:
  epsilon: 1.0e-7
record_runtime: false
)";

std::string csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  write_results_csv(os, rows);
  return os.str();
}

double objective_or_inf(const ResultRow& r) {
  return r.status == "Optimal" ? r.objective : std::numeric_limits<double>::infinity();
}

void expect_config_error(const std::string& text, const std::string& key, int line) {
  try {
    parse_experiment_config(text);
    FAIL("expected a config error for " << key);
  } catch (const ConfigError& e) {
    CHECK(e.key() == key);
    CHECK(e.line() == line);
  }
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("ccpower_test_" + std::to_string(::getpid()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& content = "") const {
    const auto p = path / name;
    std::ofstream(p) << content;
    return p.string();
  }
};

int cli(const std::string& args) {
  const char* exe = std::getenv("CCPOWER_CLI");
  REQUIRE_MESSAGE(exe != nullptr, "CCPOWER_CLI must point at the command-line binary");
  const int status = std::system((std::string(exe) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config errors name the key and line") {
  expect_config_error("problem: powermin\nscenario:\n  K: 3\n  M: 3\n  kappa: 0.1\n  eps: 0.05\n  alpha: 1\n"
                      "  seed: 1\nsolvr: {}\n",
                      "solvr", 9);
  expect_config_error("problem: powermin\nscenario:\n  K: 3\n  M: 3\n  kappa: 0.1\n  eps: 2\n  alpha: 1\n  seed: 1\n",
                      "scenario.eps", 6);
  expect_config_error("problem: powermin\nscenario:\n  K: 3\n  M: 3\n  kappa: 0.1\n  eps: 0.05\n  alpha: 1\n"
                      "  seed: 1\nsolver:\n  theta: 0.4\n",
                      "solver.theta", 10);
  expect_config_error("problem: powermin\nscenario:\n  K: 3\n  M: 3\n  kappa: 0.1\n  eps: 0.05\n  alpha: 1\n"
                      "  seed: 1\nsweep:\n  parameter: mu\n  values: [1]\n",
                      "sweep.parameter", 10);
  expect_config_error("problem: maxmin-total\nscenario:\n  K: 3\n  M: 3\n  kappa: 0.1\n  eps: 0.05\n  alpha: 1\n"
                      "  seed: 1\n",
                      "scenario.caps.total", 3);
  expect_config_error("problem: minpower\nscenario: {}\n", "problem", 1);
}

TEST_CASE("resolved config round-trips and reproduces identical CSV") {
  const auto c = parse_experiment_config(kPowerMin);
  const auto text = to_yaml(c);
  const auto back = parse_experiment_config(text);
  CHECK(to_yaml(back) == text);
  const auto a = csv(run_experiment(c, false, 1));
  const auto b = csv(run_experiment(back, false, 4));
  CHECK(a == b);
  CHECK(a.rfind(std::string(kResultsHeader) + "\n", 0) == 0);

  std::istringstream in(a);
  const auto rows = read_results_csv(in);
  REQUIRE(rows.size() == 2);
  CHECK(csv(rows) == a);
}

TEST_CASE("power grows along an SINR-target sweep") {
  auto c = parse_experiment_config(kPowerMin);
  c.seeds = {1};
  c.sweep = SweepSpec{"alpha", {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0}};
  const auto rows = run_experiment(c);
  REQUIRE(rows.size() == 8);
  CHECK(rows[0].status == "Optimal");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].scenario_id == "seed1_pt" + std::to_string(i));
    CHECK(objective_or_inf(rows[i]) >= objective_or_inf(rows[i - 1]) * (1.0 - 1e-6));
  }
}

TEST_CASE("max-min SINR grows along a budget sweep") {
  auto c = parse_experiment_config(R"(problem: maxmin-total
scenario: {K: 3, M: 3, kappa: 0.1, eps: 0.05, alpha: 1, seed: 3}
sweep: {parameter: budget, values: [0.01, 0.1, 1, 10]}
record_runtime: false
)");
  const auto rows = run_experiment(c);
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].status == "Optimal");
    if (i > 0) CHECK(rows[i].objective >= rows[i - 1].objective * (1.0 - 2e-3));
  }
}

TEST_CASE("MSE target grid") {
  auto c = parse_experiment_config(R"(problem: msemin
scenario: {K: 3, M: 3, sigma2: 1.5e-3, mu_dB: -10, phi: 0.99, seed: 2}
sweep: {parameter: mu, values: [-15, -14, -13, -12, -11, -10, -9, -8, -7, -6, -5]}
record_runtime: false
)");
  const auto rows = run_experiment(c);
  REQUIRE(rows.size() == 11);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].alpha_or_mu == doctest::Approx(std::pow(10.0, (-15.0 + static_cast<double>(i)) / 10.0)));
    CHECK(rows[i].eps == doctest::Approx(0.01));
    if (i > 0) CHECK(objective_or_inf(rows[i]) <= objective_or_inf(rows[i - 1]) * (1.0 + 1e-6));
  }
  CHECK(rows.back().status == "Optimal");
}

TEST_CASE("command-line exit codes") {
  TempDir dir;
  const std::string config = dir.file("exp.yaml", R"(problem: powermin
scenario:
  K: 3
  M: 3
  kappa: 0.1
  eps: 0.05
  alpha: 1.0
  seed: 1
  variance_convention: norm
seeds: [1, 3]
validate: {samples: 20000, seed: 5}
record_runtime: false
)");
  const std::string results = (dir.path / "results.csv").string();
  REQUIRE(cli("powermin --config " + config + " --out " + results) == 0);
  CHECK(cli("validate --config " + config + " --solution " + results) == 0);

  // Half the power misses the outage target.
  std::vector<ResultRow> rows;
  {
    std::ifstream in(results);
    rows = read_results_csv(in);
  }
  REQUIRE(rows.size() == 2);
  for (auto& r : rows)
    for (auto& p : r.allocation) p *= 0.5;
  const std::string halved = (dir.path / "halved.csv").string();
  {
    std::ofstream out(halved);
    write_results_csv(out, rows);
  }
  CHECK(cli("validate --config " + config + " --solution " + halved) == 1);

  CHECK(cli("validate --config " + config + " --solution " + dir.file("empty.csv")) == 2);
  CHECK(cli("powermin --config " + config + " --bogus") == 2);
  CHECK(cli("maxmin --config " + config) == 2);

  std::string other = config;
  {
    std::ifstream in(config);
    std::stringstream ss;
    ss << in.rdbuf();
    auto text = ss.str();
    text.replace(text.find("kappa: 0.1"), 10, "kappa: 0.2");
    other = dir.file("other.yaml", text);
  }
  CHECK(cli("validate --config " + other + " --solution " + results) == 3);
}
