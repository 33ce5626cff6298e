// Command-line front end.
//
//   ccpower powermin|maxmin|msemin --config exp.yaml [--out results.csv] [--seed N]
//   ccpower sweep    --config exp.yaml [--out results.csv]
//   ccpower validate --config exp.yaml --solution results.csv [--out report.csv]
//                    [--samples N] [--seed N] [--histogram hist.csv --bins B]
//
// Exit codes: 0 ok, 1 a validation check failed, 2 usage or config error,
// 3 stale solution, 4 solver or internal error.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ccpower/errors.hpp"
#include "ccpower/experiment.hpp"
#include "ccpower/montecarlo.hpp"
#include "ccpower/problems.hpp"

using namespace ccpower;

namespace {

constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitStale = 3;
constexpr int kExitInternal = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Writes to `path`, or stdout when it is empty or "-".
template <class Fn>
void with_output(const std::string& path, Fn fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw UsageError("cannot open '" + path + "' for writing");
  fn(out);
}

struct RunArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string emit_config;
};

int run(const RunArgs& a, const std::string& command) {
  ExperimentConfig c = load_experiment_config(a.config);
  const bool family_ok = (command == "powermin" && c.problem == ProblemKind::PowerMin) ||
                         (command == "maxmin" && is_maxmin(c.problem)) ||
                         (command == "msemin" && c.problem == ProblemKind::MseMin) || command == "sweep";
  if (!family_ok) throw UsageError("config problem '" + to_string(c.problem) + "' does not match '" + command + "'");
  if (command == "sweep" && !c.sweep) throw UsageError("sweep needs a sweep block in the config");
  if (a.seed) c.seeds = {*a.seed};
  if (!a.out.empty()) c.output = a.out;
  if (!a.emit_config.empty()) with_output(a.emit_config, [&](std::ostream& os) { os << to_yaml(c); });

  const auto rows = run_experiment(c, command == "sweep");
  with_output(c.output, [&](std::ostream& os) { write_results_csv(os, rows); });
  return 0;
}

struct ValidateArgs {
  std::string config;
  std::string solution;
  std::string out;
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
  std::string histogram;
  std::size_t bins = 40;
};

int validate(const ValidateArgs& a) {
  const ExperimentConfig c = load_experiment_config(a.config);
  std::ifstream in(a.solution);
  if (!in) throw UsageError("cannot open solution file '" + a.solution + "'");
  std::vector<ResultRow> rows;
  try {
    rows = read_results_csv(in);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (rows.empty()) throw UsageError("solution file '" + a.solution + "' has no rows");

  const ValidateSpec defaults = c.validate.value_or(ValidateSpec{});
  const std::size_t samples = a.samples.value_or(defaults.samples);
  const std::uint64_t seed = a.seed.value_or(defaults.seed);
  const auto entries = validate_solutions(c, rows, samples, seed);
  with_output(a.out, [&](std::ostream& os) { write_validation_csv(os, entries); });

  if (!a.histogram.empty()) {
    if (!is_broadcast(c.problem)) throw UsageError("--histogram applies to msemin solutions only");
    with_output(a.histogram, [&](std::ostream& os) {
      for (const auto& row : rows) {
        if (row.allocation.empty()) continue;
        ExperimentConfig rc = c;
        if (row.sweep_value) apply_sweep_value(rc, c.sweep->parameter, *row.sweep_value);
        BroadcastParams bp = rc.broadcast;
        bp.seed = row.seed;
        const BroadcastScenario s = generate_broadcast_scenario(bp);
        const vec q = Eigen::Map<const vec>(row.allocation.data(), static_cast<Eigen::Index>(row.allocation.size()));
        os << "# " << row.scenario_id << '\n';
        write_histogram_csv(os, histogram_mse(s, q, samples, a.bins, seed));
      }
    });
  }

  for (const auto& e : entries)
    if (!e.report.all_pass()) return kExitCheckFailed;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chance-constrained MISO power allocation"};
  app.require_subcommand(1);

  RunArgs run_args;
  std::string command;
  for (const char* name : {"powermin", "maxmin", "msemin", "sweep"}) {
    auto* sub = app.add_subcommand(name, std::string("Solve the config's ") +
                                             (std::string(name) == "sweep" ? "sweep grid" : name + std::string(" problem")));
    sub->add_option("--config", run_args.config, "Experiment config (YAML)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", run_args.out, "Results CSV (default: config output, else stdout)");
    if (std::string(name) != "sweep") sub->add_option("--seed", run_args.seed, "Single scenario seed");
    sub->add_option("--emit-config", run_args.emit_config, "Write the resolved config here");
    sub->callback([&command, name] { command = name; });
  }

  ValidateArgs val;
  auto* vsub = app.add_subcommand("validate", "Monte Carlo check of a results CSV");
  vsub->add_option("--config", val.config, "Experiment config that produced the solutions")
      ->required()
      ->check(CLI::ExistingFile);
  vsub->add_option("--solution", val.solution, "Results CSV")->required();
  vsub->add_option("--out", val.out, "Report CSV (default stdout)");
  vsub->add_option("--samples", val.samples, "Monte Carlo samples")->check(CLI::Range(std::size_t{1000}, std::size_t{1} << 40));
  vsub->add_option("--seed", val.seed, "Validation seed");
  vsub->add_option("--histogram", val.histogram, "MSE histogram CSV (msemin only)");
  vsub->add_option("--bins", val.bins, "Histogram bins")->check(CLI::Range(2, 100000));
  vsub->callback([&command] { command = "validate"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (command == "validate") return validate(val);
    return run(run_args, command);
  } catch (const UsageError& e) {
    std::cerr << "ccpower: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "ccpower: " << e.what() << '\n';
    return kExitUsage;
  } catch (const StaleSolution& e) {
    std::cerr << "ccpower: stale solution: " << e.what() << '\n';
    return kExitStale;
  } catch (const std::exception& e) {
    std::cerr << "ccpower: " << e.what() << '\n';
    return kExitInternal;
  }
}
