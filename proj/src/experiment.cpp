#include "ccpower/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <exception>
#include <chrono>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <yaml-cpp/yaml.h>

#include "ccpower/errors.hpp"
#include "ccpower/problems.hpp"
#include "ccpower/scenario_io.hpp"
#include "yaml_util.hpp"

namespace ccpower {

using namespace yamlutil;

std::string to_string(ProblemKind p) {
  switch (p) {
    case ProblemKind::PowerMin: return "powermin";
    case ProblemKind::MaxMinIndividual: return "maxmin-individual";
    case ProblemKind::MaxMinTotal: return "maxmin-total";
    case ProblemKind::MseMin: return "msemin";
  }
  return "?";
}

ProblemKind parse_problem_kind(const std::string& s) {
  for (auto p : {ProblemKind::PowerMin, ProblemKind::MaxMinIndividual, ProblemKind::MaxMinTotal, ProblemKind::MseMin})
    if (to_string(p) == s) return p;
  throw std::invalid_argument("unknown problem '" + s + "' (expected powermin|maxmin-individual|maxmin-total|msemin)");
}

std::vector<std::uint64_t> ExperimentConfig::scenario_seeds() const {
  if (!seeds.empty()) return seeds;
  return {is_broadcast(problem) ? broadcast.seed : interference.seed};
}

namespace {

bool sweep_allowed(ProblemKind p, const std::string& param) {
  switch (p) {
    case ProblemKind::PowerMin: return param == "alpha" || param == "kappa" || param == "eps" || param == "budget";
    case ProblemKind::MaxMinIndividual:
    case ProblemKind::MaxMinTotal: return param == "kappa" || param == "eps" || param == "budget";
    case ProblemKind::MseMin: return param == "mu";
  }
  return false;
}

}  // namespace

void apply_sweep_value(ExperimentConfig& c, const std::string& parameter, double v) {
  if (parameter == "alpha") {
    c.interference.alpha = v;
  } else if (parameter == "kappa") {
    c.interference.kappa = v;
  } else if (parameter == "eps") {
    c.interference.eps = v;
  } else if (parameter == "mu") {
    c.broadcast.mu_dB = v;
  } else if (parameter == "budget") {
    c.interference.caps.total = v;
    c.interference.caps.individual = v / static_cast<double>(c.interference.K);
  } else {
    throw std::invalid_argument("unknown sweep parameter '" + parameter + "'");
  }
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  const YAML::Node root = parse(text);
  if (!root || !root.IsMap()) throw ConfigError("", 1, "config must be a mapping");
  check_keys(root, "", {"problem", "scenario", "seeds", "sweep", "solver", "validate", "output", "record_runtime"});

  ExperimentConfig c;
  const auto problem = read<std::string>(root, "", "problem");
  try {
    c.problem = parse_problem_kind(problem);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("problem", line_of(root["problem"]), e.what());
  }

  const YAML::Node scenario = root["scenario"];
  if (!scenario) throw ConfigError("scenario", line_of(root), "missing required key");
  if (is_broadcast(c.problem))
    c.broadcast = detail::broadcast_params_from_node(scenario, "scenario");
  else
    c.interference = detail::interference_params_from_node(scenario, "scenario");

  if (const YAML::Node seeds = root["seeds"]) {
    if (!seeds.IsSequence() || seeds.size() == 0) throw ConfigError("seeds", line_of(seeds), "expected a nonempty list");
    for (const auto& s : seeds) {
      try {
        c.seeds.push_back(s.as<std::uint64_t>());
      } catch (const YAML::Exception&) {
        throw ConfigError("seeds", line_of(s), "seeds must be nonnegative integers");
      }
    }
  }

  if (const YAML::Node sweep = root["sweep"]) {
    check_keys(sweep, "sweep", {"parameter", "values"});
    SweepSpec spec;
    spec.parameter = read<std::string>(sweep, "sweep", "parameter");
    require(sweep_allowed(c.problem, spec.parameter), sweep, "sweep", "parameter",
            "'" + spec.parameter + "' cannot be swept for problem " + problem);
    const YAML::Node values = sweep["values"];
    if (!values || !values.IsSequence() || values.size() == 0)
      throw ConfigError("sweep.values", line_of(values ? values : sweep), "expected a nonempty list of numbers");
    for (const auto& v : values) {
      try {
        spec.values.push_back(v.as<double>());
      } catch (const YAML::Exception&) {
        throw ConfigError("sweep.values", line_of(v), "sweep values must be numbers");
      }
    }
    for (double v : spec.values) {
      const bool ok = spec.parameter == "mu" || (spec.parameter == "kappa" || spec.parameter == "eps" ? v > 0.0 && v < 1.0 : v > 0.0);
      if (!ok) throw ConfigError("sweep.values", line_of(values), "value outside the domain of " + spec.parameter);
    }
    c.sweep = std::move(spec);
  }

  if (const YAML::Node solver = root["solver"]) {
    check_keys(solver, "solver", {"epsilon", "theta", "newton_tol"});
    c.solver.epsilon = read_or<double>(solver, "solver", "epsilon", c.solver.epsilon);
    c.solver.theta = read_or<double>(solver, "solver", "theta", c.solver.theta);
    c.solver.newton_tol = read_or<double>(solver, "solver", "newton_tol", c.solver.newton_tol);
    require(c.solver.epsilon > 0.0 && c.solver.epsilon < 1.0, solver, "solver", "epsilon", "must lie in (0,1)");
    require(c.solver.theta > 0.5 && c.solver.theta < 1.0, solver, "solver", "theta", "must lie in (0.5,1)");
    require(c.solver.newton_tol > 0.0, solver, "solver", "newton_tol", "must be positive");
  }

  if (const YAML::Node v = root["validate"]) {
    check_keys(v, "validate", {"samples", "seed"});
    ValidateSpec spec;
    spec.samples = read_or<std::size_t>(v, "validate", "samples", spec.samples);
    spec.seed = read_or<std::uint64_t>(v, "validate", "seed", spec.seed);
    require(spec.samples >= 1000, v, "validate", "samples", "must be at least 1000");
    c.validate = spec;
  }

  c.output = read_or<std::string>(root, "", "output", "");
  c.record_runtime = read_or<bool>(root, "", "record_runtime", true);

  const bool budget_swept = c.sweep && c.sweep->parameter == "budget";
  if (c.problem == ProblemKind::MaxMinIndividual && !c.interference.caps.individual && !budget_swept)
    throw ConfigError("scenario.caps.individual", line_of(scenario), "maxmin-individual needs an individual cap");
  if (c.problem == ProblemKind::MaxMinTotal && !c.interference.caps.total && !budget_swept)
    throw ConfigError("scenario.caps.total", line_of(scenario), "maxmin-total needs a total cap");
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", 0, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

std::string to_yaml(const ExperimentConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(std::numeric_limits<double>::max_digits10);
  out << YAML::BeginMap;
  out << YAML::Key << "problem" << YAML::Value << to_string(c.problem);
  out << YAML::Key << "scenario" << YAML::Value;
  if (is_broadcast(c.problem))
    detail::emit(out, c.broadcast);
  else
    detail::emit(out, c.interference);
  out << YAML::Key << "seeds" << YAML::Value << YAML::Flow << c.scenario_seeds();
  if (c.sweep) {
    out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "parameter" << YAML::Value << c.sweep->parameter;
    out << YAML::Key << "values" << YAML::Value << YAML::Flow << c.sweep->values;
    out << YAML::EndMap;
  }
  out << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "epsilon" << YAML::Value << c.solver.epsilon;
  out << YAML::Key << "theta" << YAML::Value << c.solver.theta;
  out << YAML::Key << "newton_tol" << YAML::Value << c.solver.newton_tol;
  out << YAML::EndMap;
  if (c.validate) {
    out << YAML::Key << "validate" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "samples" << YAML::Value << c.validate->samples;
    out << YAML::Key << "seed" << YAML::Value << c.validate->seed;
    out << YAML::EndMap;
  }
  if (!c.output.empty()) out << YAML::Key << "output" << YAML::Value << c.output;
  out << YAML::Key << "record_runtime" << YAML::Value << c.record_runtime;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

// ---------------------------------------------------------------------------
// Running

namespace {

struct Point {
  std::optional<double> sweep_value;
  std::size_t sweep_index = 0;
  std::uint64_t seed = 0;
};

ExperimentConfig resolve(const ExperimentConfig& config, const std::optional<double>& sweep_value) {
  ExperimentConfig c = config;
  if (sweep_value) apply_sweep_value(c, config.sweep->parameter, *sweep_value);
  return c;
}

InterferenceScenario build_interference(const ExperimentConfig& c, std::uint64_t seed) {
  InterferenceParams p = c.interference;
  p.seed = seed;
  return generate_interference_scenario(p);
}

BroadcastScenario build_broadcast(const ExperimentConfig& c, std::uint64_t seed) {
  BroadcastParams p = c.broadcast;
  p.seed = seed;
  return generate_broadcast_scenario(p);
}

std::string scenario_id(const Point& pt) {
  std::string id = "seed" + std::to_string(pt.seed);
  if (pt.sweep_value) id += "_pt" + std::to_string(pt.sweep_index);
  return id;
}

ResultRow run_point(const ExperimentConfig& config, const Point& pt) {
  const ExperimentConfig c = resolve(config, pt.sweep_value);
  ResultRow row;
  row.scenario_id = scenario_id(pt);
  row.problem = to_string(c.problem);
  row.seed = pt.seed;
  row.sweep_value = pt.sweep_value;

  const auto t0 = std::chrono::steady_clock::now();
  if (c.problem == ProblemKind::MseMin) {
    const BroadcastScenario s = build_broadcast(c, pt.seed);
    const PowerMinResult r = solve_mse_power_min(s, c.solver);
    row.K = s.K;
    row.M = s.M;
    row.kappa = c.broadcast.sigma2;
    row.eps = 1.0 - c.broadcast.phi;
    row.alpha_or_mu = db_to_linear(c.broadcast.mu_dB);
    row.objective = r.total_power;
    row.objective_dBW = r.total_power_dBW;
    row.status = to_string(r.status);
    row.iterations = r.outcome.iterations;
    row.cuts = r.outcome.cuts_added;
    row.fingerprint = fingerprint(s);
    row.allocation.assign(r.p_star.data(), r.p_star.data() + r.p_star.size());
  } else {
    const InterferenceScenario s = build_interference(c, pt.seed);
    row.K = s.K;
    row.M = s.M;
    row.kappa = c.interference.kappa;
    row.eps = c.interference.eps;
    row.fingerprint = fingerprint(s);
    if (c.problem == ProblemKind::PowerMin) {
      const PowerMinResult r = solve_power_min(s, c.solver);
      row.alpha_or_mu = c.interference.alpha;
      row.objective = r.total_power;
      row.objective_dBW = r.total_power_dBW;
      row.status = to_string(r.status);
      row.iterations = r.outcome.iterations;
      row.cuts = r.outcome.cuts_added;
      row.allocation.assign(r.p_star.data(), r.p_star.data() + r.p_star.size());
    } else {
      const BudgetMode mode = c.problem == ProblemKind::MaxMinIndividual ? BudgetMode::Individual : BudgetMode::Total;
      const MaxMinResult r = solve_maxmin(s, mode, c.solver);
      row.alpha_or_mu = r.a_star;
      row.objective = r.a_star;
      row.objective_dBW = r.p_star.size() ? linear_to_db(r.p_star.sum()) : std::numeric_limits<double>::infinity();
      row.status = to_string(r.status);
      row.iterations = r.solver_iterations;
      row.cuts = r.cuts;
      row.allocation.assign(r.p_star.data(), r.p_star.data() + r.p_star.size());
    }
  }
  if (c.record_runtime)
    row.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("results CSV: bad number '" + s + "' in column " + what);
  return v;
}

std::uint64_t parse_uint(const std::string& s, const std::string& what, int base = 10) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("results CSV: bad integer '" + s + "' in column " + what);
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& config, bool use_sweep, std::size_t workers) {
  std::vector<Point> points;
  const auto seeds = config.scenario_seeds();
  if (use_sweep && config.sweep) {
    for (std::size_t i = 0; i < config.sweep->values.size(); ++i)
      for (auto seed : seeds) points.push_back({config.sweep->values[i], i, seed});
  } else {
    for (auto seed : seeds) points.push_back({std::nullopt, 0, seed});
  }

  std::vector<ResultRow> rows(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, points.size());
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        rows[i] = run_point(config, points[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kResultsHeader << '\n';
  for (const auto& r : rows) {
    out << r.scenario_id << ',' << r.problem << ',' << r.K << ',' << r.M << ',' << fmt(r.kappa) << ',' << fmt(r.eps)
        << ',' << fmt(r.alpha_or_mu) << ',' << fmt(r.objective) << ',' << fmt(r.objective_dBW) << ',' << r.status
        << ',' << r.iterations << ',' << r.cuts << ',' << fmt(r.runtime_ms) << ',' << r.seed << ','
        << (r.sweep_value ? fmt(*r.sweep_value) : std::string()) << ',';
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(r.fingerprint));
    out << hex << ',';
    for (std::size_t i = 0; i < r.allocation.size(); ++i) out << (i ? ";" : "") << fmt(r.allocation[i]);
    out << '\n';
  }
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) return {};
  if (line != kResultsHeader) throw std::invalid_argument("results CSV: unexpected header");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 17) throw std::invalid_argument("results CSV: expected 17 columns, got " + std::to_string(f.size()));
    ResultRow r;
    r.scenario_id = f[0];
    r.problem = f[1];
    r.K = parse_uint(f[2], "K");
    r.M = parse_uint(f[3], "M");
    r.kappa = parse_double(f[4], "kappa");
    r.eps = parse_double(f[5], "eps");
    r.alpha_or_mu = parse_double(f[6], "alpha_or_mu");
    r.objective = parse_double(f[7], "objective");
    r.objective_dBW = parse_double(f[8], "objective_dBW");
    r.status = f[9];
    r.iterations = parse_uint(f[10], "iterations");
    r.cuts = parse_uint(f[11], "cuts");
    r.runtime_ms = parse_double(f[12], "runtime_ms");
    r.seed = parse_uint(f[13], "seed");
    if (!f[14].empty()) r.sweep_value = parse_double(f[14], "sweep_value");
    r.fingerprint = parse_uint(f[15], "fingerprint", 16);
    if (!f[16].empty())
      for (const auto& v : split(f[16], ';')) r.allocation.push_back(parse_double(v, "allocation"));
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ValidationEntry> validate_solutions(const ExperimentConfig& config, const std::vector<ResultRow>& rows,
                                                std::size_t samples, std::uint64_t seed) {
  std::vector<ValidationEntry> out;
  for (const auto& row : rows) {
    if (row.problem != to_string(config.problem))
      throw StaleSolution("row " + row.scenario_id + " was produced for problem " + row.problem);
    if (row.sweep_value && !config.sweep)
      throw StaleSolution("row " + row.scenario_id + " carries a sweep value but the config has no sweep");
    if (row.allocation.empty()) continue;
    const ExperimentConfig c = resolve(config, row.sweep_value);
    const vec p = Eigen::Map<const vec>(row.allocation.data(), static_cast<Eigen::Index>(row.allocation.size()));
    if (is_broadcast(c.problem)) {
      const BroadcastScenario s = build_broadcast(c, row.seed);
      if (fingerprint(s) != row.fingerprint)
        throw StaleSolution("scenario for row " + row.scenario_id + " no longer matches the stored fingerprint");
      if (p.size() != static_cast<Eigen::Index>(s.K)) throw StaleSolution("allocation size does not match K");
      out.push_back({row.scenario_id, estimate_mse_satisfaction(s, p, samples, seed)});
    } else {
      InterferenceScenario s = build_interference(c, row.seed);
      if (fingerprint(s) != row.fingerprint)
        throw StaleSolution("scenario for row " + row.scenario_id + " no longer matches the stored fingerprint");
      if (p.size() != static_cast<Eigen::Index>(s.K)) throw StaleSolution("allocation size does not match K");
      // Max-min solutions are held to the SINR level they achieved.
      if (is_maxmin(c.problem)) s.alpha.assign(s.K, row.alpha_or_mu);
      out.push_back({row.scenario_id, estimate_outage(s, p, samples, seed)});
    }
  }
  return out;
}

void write_validation_csv(std::ostream& out, const std::vector<ValidationEntry>& entries) {
  out << "scenario_id,user,rate,halfwidth,target,pass\n";
  for (const auto& e : entries) write_report_csv(out, e.scenario_id, e.report, false);
}

}  // namespace ccpower
