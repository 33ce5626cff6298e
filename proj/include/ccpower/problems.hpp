#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ccpower/bernstein.hpp"
#include "ccpower/llbcp.hpp"
#include "ccpower/model.hpp"

namespace ccpower {

/// Presents an oracle in scaled coordinates: p = scale ⊙ x.head(inner dim),
/// t = value_scale · t̃, and G̃ = G / value_scale. Trailing variables beyond
/// the inner dimension are ignored by the constraint.
class ScaledOracle final : public ConstraintOracle {
 public:
  ScaledOracle(std::shared_ptr<const ConstraintOracle> inner, vec scale, double value_scale, std::size_t dimension);

  std::size_t dimension() const override { return dim_; }
  std::size_t user() const override { return inner_->user(); }
  double t_lower(const vec& x) const override;
  double value(const vec& x, double t) const override;
  vec gradient(const vec& x, double t) const override;

  vec to_inner(const vec& x) const;
  const ConstraintOracle& inner() const { return *inner_; }

 private:
  std::shared_ptr<const ConstraintOracle> inner_;
  vec scale_;
  double value_scale_;
  std::size_t dim_;
};

struct PowerMinResult {
  vec p_star;                  // empty unless a feasible point was found
  double total_power = 0.0;    // objective in physical units
  double total_power_dBW = 0.0;
  SolveStatus status = SolveStatus::InfeasibleOrUnbounded;
  ExitTest exit_test = ExitTest::None;
  bool certified = false;      // every oracle re-checked with a full t-search
  vec certificate;             // inf_t G_k / (scale of constraint k) at p_star
  SolveOutcome outcome;
};

/// Per-constraint values inf_t G_k(p)/s_k from an independent full
/// minimization, with s_k the constraint's natural scale.
vec certify_interference(const InterferenceScenario& s, const vec& p);
vec certify_mse(const BroadcastScenario& s, const vec& q);

/// minimize 1ᵀp subject to the SINR outage constraints, p >= 0 and any caps.
PowerMinResult solve_power_min(const InterferenceScenario& scenario, const SolverConfig& config = {},
                               const TraceSink& trace = {});

enum class BudgetMode { Individual, Total };
std::string to_string(BudgetMode m);

struct ScaleResult {
  double b_star = 0.0;  // +inf when the target is infeasible
  vec p;                // allocation at b_star, physical units
  SolveStatus status = SolveStatus::InfeasibleOrUnbounded;
  std::size_t iterations = 0;
  std::size_t cuts = 0;
};

/// Smallest budget scale b such that SINR target `a` is met with outage
/// control under the caps multiplied by b. `b_cap` bounds the search box.
ScaleResult inner_power_scale(const InterferenceScenario& scenario, double a, BudgetMode mode,
                              const SolverConfig& config = {}, std::optional<double> b_cap = std::nullopt);

struct MaxMinResult {
  double a_star = 0.0;
  vec p_star;
  double fixed_point_residual = 0.0;  // |b*(a*) - 1|
  std::size_t bisection_iterations = 0;
  std::size_t solver_iterations = 0;
  std::size_t cuts = 0;
  SolveStatus status = SolveStatus::InfeasibleOrUnbounded;
};

inline constexpr double kBisectionTolerance = 1e-3;
inline constexpr int kMaxDoublings = 60;
inline constexpr double kScaleCap = 4.0;

MaxMinResult solve_maxmin(const InterferenceScenario& scenario, BudgetMode mode, const SolverConfig& config = {});

/// minimize Σ q_k ‖G[:,k]‖² subject to the MSE outage constraints and q >= 0.
PowerMinResult solve_mse_power_min(const BroadcastScenario& scenario, const SolverConfig& config = {},
                                   const TraceSink& trace = {});

}  // namespace ccpower
