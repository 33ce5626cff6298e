#pragma once

// Batch experiments: config parsing, sweep execution, results CSV, and
// Monte Carlo validation of stored solutions.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ccpower/llbcp.hpp"
#include "ccpower/model.hpp"
#include "ccpower/montecarlo.hpp"

namespace ccpower {

enum class ProblemKind { PowerMin, MaxMinIndividual, MaxMinTotal, MseMin };

std::string to_string(ProblemKind p);
ProblemKind parse_problem_kind(const std::string& s);
inline bool is_broadcast(ProblemKind p) { return p == ProblemKind::MseMin; }
inline bool is_maxmin(ProblemKind p) { return p == ProblemKind::MaxMinIndividual || p == ProblemKind::MaxMinTotal; }

struct SweepSpec {
  std::string parameter;  // alpha | kappa | eps | mu | budget
  std::vector<double> values;
};

struct ValidateSpec {
  std::size_t samples = 100000;
  std::uint64_t seed = 1;
};

struct ExperimentConfig {
  ProblemKind problem = ProblemKind::PowerMin;
  InterferenceParams interference;  // used unless the problem is msemin
  BroadcastParams broadcast;        // used for msemin
  std::vector<std::uint64_t> seeds; // scenario seeds; empty means the scenario block's seed
  std::optional<SweepSpec> sweep;
  SolverConfig solver;
  std::optional<ValidateSpec> validate;
  std::string output;
  bool record_runtime = true;

  std::vector<std::uint64_t> scenario_seeds() const;
};

/// Throws ConfigError naming the offending key and line.
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);
/// Fully resolved config; parsing it back gives an equal experiment.
std::string to_yaml(const ExperimentConfig& config);

/// Applies one sweep value to copies of the scenario recipes.
void apply_sweep_value(ExperimentConfig& config, const std::string& parameter, double value);

struct ResultRow {
  std::string scenario_id;
  std::string problem;
  std::size_t K = 0;
  std::size_t M = 0;
  double kappa = 0.0;        // sigma2 for msemin
  double eps = 0.0;          // 1 - phi for msemin
  double alpha_or_mu = 0.0;  // a* for maxmin, linear mu for msemin
  double objective = 0.0;
  double objective_dBW = 0.0;
  std::string status;
  std::size_t iterations = 0;
  std::size_t cuts = 0;
  double runtime_ms = 0.0;
  std::uint64_t seed = 0;
  std::optional<double> sweep_value;
  std::uint64_t fingerprint = 0;
  std::vector<double> allocation;  // empty when no feasible point was found
};

inline constexpr const char* kResultsHeader =
    "scenario_id,problem,K,M,kappa,eps,alpha_or_mu,objective,objective_dBW,status,iterations,cuts,runtime_ms,seed,"
    "sweep_value,fingerprint,allocation";

/// One row per (sweep value x scenario seed), in that nesting order. When
/// `use_sweep` is false the sweep block is ignored. Points run on up to
/// `workers` threads (0 = hardware concurrency); row order is fixed.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config, bool use_sweep = true, std::size_t workers = 0);

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(std::istream& in);

struct ValidationEntry {
  std::string scenario_id;
  OutageReport report;
};

/// Rebuilds each row's scenario from the config and checks it by Monte
/// Carlo. Rows without an allocation are skipped. Throws StaleSolution when
/// a rebuilt scenario's fingerprint differs from the stored one.
std::vector<ValidationEntry> validate_solutions(const ExperimentConfig& config, const std::vector<ResultRow>& rows,
                                                std::size_t samples, std::uint64_t seed);

void write_validation_csv(std::ostream& out, const std::vector<ValidationEntry>& entries);

}  // namespace ccpower
