#include "ccpower/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ccpower/errors.hpp"

namespace ccpower {

ScaledOracle::ScaledOracle(std::shared_ptr<const ConstraintOracle> inner, vec scale, double value_scale,
                           std::size_t dimension)
    : inner_(std::move(inner)), scale_(std::move(scale)), value_scale_(value_scale), dim_(dimension) {
  if (!inner_) throw std::invalid_argument("scaled oracle needs an inner oracle");
  if (scale_.size() != static_cast<Eigen::Index>(inner_->dimension()) || dim_ < inner_->dimension())
    throw std::invalid_argument("scaled oracle dimensions do not match");
  if (!(value_scale_ > 0.0) || !(scale_.array() > 0.0).all())
    throw std::invalid_argument("scaled oracle scales must be positive");
}

vec ScaledOracle::to_inner(const vec& x) const {
  return scale_.cwiseProduct(x.head(static_cast<Eigen::Index>(inner_->dimension())));
}

double ScaledOracle::t_lower(const vec& x) const { return inner_->t_lower(to_inner(x)) / value_scale_; }

double ScaledOracle::value(const vec& x, double t) const {
  return inner_->value(to_inner(x), t * value_scale_) / value_scale_;
}

vec ScaledOracle::gradient(const vec& x, double t) const {
  vec g = vec::Zero(static_cast<Eigen::Index>(dim_));
  g.head(scale_.size()) = inner_->gradient(to_inner(x), t * value_scale_).cwiseProduct(scale_) / value_scale_;
  return g;
}

std::string to_string(BudgetMode m) { return m == BudgetMode::Individual ? "individual" : "total"; }

namespace {

using OracleList = std::vector<std::shared_ptr<const ConstraintOracle>>;

// Power each link would need without interference or uncertainty.
vec reference_powers(const InterferenceScenario& s) {
  vec ref(static_cast<Eigen::Index>(s.K));
  for (std::size_t k = 0; k < s.K; ++k) {
    const double gain = s.cross_gain(k, k);
    if (!(gain > 0.0)) throw DomainError("link has zero beamformed gain");
    ref[static_cast<Eigen::Index>(k)] = s.alpha[k] * s.eta2[k] / gain;
  }
  return ref;
}

OracleList interference_oracles(const InterferenceScenario& s, const vec& scale, std::size_t dim,
                                std::optional<double> target = std::nullopt) {
  OracleList out;
  for (std::size_t k = 0; k < s.K; ++k) {
    const double a = target ? *target : s.alpha[k];
    auto inner = std::make_shared<InterferenceOracle>(s, k, a);
    out.push_back(std::make_shared<ScaledOracle>(inner, scale, a * s.eta2[k], dim));
  }
  return out;
}

OracleList mse_oracles(const BroadcastScenario& s, const vec& scale) {
  OracleList out;
  for (std::size_t k = 0; k < s.K; ++k) {
    auto inner = std::make_shared<MseOracle>(s, k);
    out.push_back(std::make_shared<ScaledOracle>(inner, scale, s.eta2[static_cast<Eigen::Index>(k)], s.K));
  }
  return out;
}

vec certify(const OracleList& oracles, const vec& x) {
  vec g(static_cast<Eigen::Index>(oracles.size()));
  for (std::size_t k = 0; k < oracles.size(); ++k)
    g[static_cast<Eigen::Index>(k)] = minimize_over_t(*oracles[k], x, InnerMode::FullMinimize).g_value;
  return g;
}

bool all_certified(const vec& g) {
  for (Eigen::Index k = 0; k < g.size(); ++k)
    if (!within_feasibility_tolerance(g[k])) return false;
  return true;
}

SolverConfig with_objective(SolverConfig config, vec objective) {
  config.objective = std::move(objective);
  return config;
}

PowerMinResult finish_power_min(const OracleList& oracles, const vec& scale, const vec& weights,
                                SolveOutcome outcome) {
  PowerMinResult r;
  r.status = outcome.status;
  r.exit_test = outcome.exit_test;
  if (outcome.p_best) {
    const vec& x = *outcome.p_best;
    r.p_star = scale.cwiseProduct(x);
    r.total_power = weights.dot(r.p_star);
    r.total_power_dBW = linear_to_db(r.total_power);
    r.certificate = certify(oracles, x);
    r.certified = all_certified(r.certificate);
  } else {
    r.total_power = std::numeric_limits<double>::infinity();
    r.total_power_dBW = std::numeric_limits<double>::infinity();
  }
  r.outcome = std::move(outcome);
  return r;
}

}  // namespace

vec certify_interference(const InterferenceScenario& s, const vec& p) {
  const vec ones = vec::Ones(static_cast<Eigen::Index>(s.K));
  return certify(interference_oracles(s, ones, s.K), p);
}

vec certify_mse(const BroadcastScenario& s, const vec& q) {
  return certify(mse_oracles(s, vec::Ones(static_cast<Eigen::Index>(s.K))), q);
}

PowerMinResult solve_power_min(const InterferenceScenario& s, const SolverConfig& config, const TraceSink& trace) {
  s.validate();
  for (double a : s.alpha)
    if (!(a > 0.0)) throw std::invalid_argument("power minimization needs positive SINR targets");
  const auto K = static_cast<Eigen::Index>(s.K);
  const vec scale = reference_powers(s);
  const OracleList oracles = interference_oracles(s, scale, s.K);

  Bounds bounds = Bounds::nonnegative(s.K);
  if (s.p_bar)
    for (Eigen::Index k = 0; k < K; ++k) bounds.upper[k] = (*s.p_bar)[static_cast<std::size_t>(k)] / scale[k];
  if (s.p_bar_tot) bounds.rows.push_back({-scale, -*s.p_bar_tot});

  std::optional<vec> start;
  if (s.p_bar || s.p_bar_tot) {
    vec x = vec::Constant(K, 1.0 / config.epsilon);
    x = x.cwiseMin(bounds.upper);
    if (s.p_bar_tot) x = x.cwiseMin(vec((*s.p_bar_tot / static_cast<double>(K)) / scale.array()));
    start = 0.5 * x;
  }

  const vec objective = scale / scale.mean();
  SolveOutcome outcome = solve(oracles, bounds, with_objective(config, objective), start, trace);
  return finish_power_min(oracles, scale, vec::Ones(K), std::move(outcome));
}

ScaleResult inner_power_scale(const InterferenceScenario& s, double a, BudgetMode mode, const SolverConfig& config,
                              std::optional<double> b_cap) {
  s.validate();
  const auto K = static_cast<Eigen::Index>(s.K);
  ScaleResult out;
  if (!(a > 0.0)) {
    out.b_star = 0.0;
    out.p = vec::Zero(K);
    out.status = SolveStatus::Optimal;
    return out;
  }
  vec scale(K);
  if (mode == BudgetMode::Individual) {
    if (!s.p_bar) throw std::invalid_argument("individual budget mode needs per-link caps");
    for (Eigen::Index k = 0; k < K; ++k) scale[k] = (*s.p_bar)[static_cast<std::size_t>(k)];
  } else {
    if (!s.p_bar_tot) throw std::invalid_argument("total budget mode needs a total cap");
    scale.setConstant(*s.p_bar_tot / static_cast<double>(K));
  }

  const std::size_t n = s.K + 1;
  const auto ni = static_cast<Eigen::Index>(n);
  const OracleList oracles = interference_oracles(s, scale, n, a);
  Bounds bounds = Bounds::nonnegative(n);
  if (b_cap) bounds.upper[K] = *b_cap;
  if (mode == BudgetMode::Individual) {
    for (Eigen::Index k = 0; k < K; ++k) {
      vec normal = vec::Zero(ni);
      normal[k] = -1.0;
      normal[K] = 1.0;
      bounds.rows.push_back({normal, 0.0});
    }
  } else {
    vec normal = vec::Constant(ni, -1.0 / static_cast<double>(K));
    normal[K] = 1.0;
    bounds.rows.push_back({normal, 0.0});
  }

  const double b0 = 0.5 * std::min(b_cap.value_or(1.0 / config.epsilon), 1.0 / config.epsilon);
  vec start = vec::Constant(ni, 0.25 * b0);
  start[K] = b0;

  vec objective = vec::Zero(ni);
  objective[K] = 1.0;
  const SolveOutcome outcome = solve(oracles, bounds, with_objective(config, objective), start);
  out.status = outcome.status;
  out.iterations = outcome.iterations;
  out.cuts = outcome.cuts_added;
  if (outcome.p_best) {
    out.b_star = (*outcome.p_best)[K];
    out.p = scale.cwiseProduct(outcome.p_best->head(K));
  } else {
    out.b_star = std::numeric_limits<double>::infinity();
  }
  return out;
}

MaxMinResult solve_maxmin(const InterferenceScenario& s, BudgetMode mode, const SolverConfig& config) {
  MaxMinResult out;
  auto evaluate = [&](double a) {
    const ScaleResult r = inner_power_scale(s, a, mode, config, kScaleCap);
    out.solver_iterations += r.iterations;
    out.cuts += r.cuts;
    return r;
  };
  auto accept = [&](double a, const ScaleResult& r) {
    out.a_star = a;
    out.fixed_point_residual = std::abs(r.b_star - 1.0);
    out.status = SolveStatus::Optimal;
    const auto K = static_cast<Eigen::Index>(s.K);
    if (mode == BudgetMode::Individual) {
      double worst = 0.0;
      for (Eigen::Index k = 0; k < K; ++k) worst = std::max(worst, r.p[k] / (*s.p_bar)[static_cast<std::size_t>(k)]);
      out.p_star = r.p / worst;
    } else {
      out.p_star = r.p * (*s.p_bar_tot / r.p.sum());
    }
    return out;
  };

  const ScaleResult at_zero = evaluate(0.0);
  if (at_zero.b_star > 1.0) throw std::logic_error("zero SINR target needs a positive budget scale");

  double lo = 0.0;
  double hi = 1.0;
  ScaleResult r_hi = evaluate(hi);
  for (int d = 0; r_hi.b_star <= 1.0; ++d) {
    if (std::abs(r_hi.b_star - 1.0) <= kBisectionTolerance) return accept(hi, r_hi);
    if (d == kMaxDoublings) throw std::runtime_error("max-min bisection could not bracket the SINR target");
    lo = hi;
    hi *= 2.0;
    r_hi = evaluate(hi);
  }
  if (std::abs(r_hi.b_star - 1.0) <= kBisectionTolerance) return accept(hi, r_hi);

  std::optional<std::pair<double, ScaleResult>> best_below;
  for (int it = 0; it < 200; ++it) {
    ++out.bisection_iterations;
    const double mid = 0.5 * (lo + hi);
    const ScaleResult r = evaluate(mid);
    if (std::abs(r.b_star - 1.0) <= kBisectionTolerance) return accept(mid, r);
    if (r.b_star < 1.0) {
      lo = mid;
      best_below = {mid, r};
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-14 * hi) break;
  }
  // The scale function jumped over the tolerance band; report the last point
  // below it with its honest residual.
  if (best_below) {
    accept(best_below->first, best_below->second);
    out.status = SolveStatus::IterationCap;
    return out;
  }
  out.status = SolveStatus::InfeasibleOrUnbounded;
  return out;
}

PowerMinResult solve_mse_power_min(const BroadcastScenario& s, const SolverConfig& config, const TraceSink& trace) {
  s.validate();
  const vec scale = s.eta2.cwiseQuotient(s.mu);
  const OracleList oracles = mse_oracles(s, scale);
  const vec weights = s.G.colwise().squaredNorm().transpose();
  const vec objective = scale.cwiseProduct(weights);
  SolveOutcome outcome =
      solve(oracles, Bounds::nonnegative(s.K), with_objective(config, objective / objective.mean()), std::nullopt, trace);
  return finish_power_min(oracles, scale, weights, std::move(outcome));
}

}  // namespace ccpower
