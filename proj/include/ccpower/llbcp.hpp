#pragma once

// Long-step logarithmic-barrier cutting-plane solver for
//
//   minimize objᵀp  subject to  inf_t G_k(p, t) <= 0  for every oracle k,
//
// over a bounded box with optional extra linear rows.

#include <cmath>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ccpower/bernstein.hpp"

namespace ccpower {

enum class RowTag { Box, LowerBound, Cut };

/// Localization set {p : A p >= c}.
struct Polytope {
  std::size_t n = 0;
  Eigen::MatrixXd A;
  vec c;
  vec pi;                          // reference slacks
  std::vector<RowTag> tag;
  std::vector<int> owner;          // oracle index for cut rows, -1 otherwise
  std::vector<bool> pi_pending;    // new cut whose pi is set at the next center

  std::size_t rows() const { return static_cast<std::size_t>(A.rows()); }
  vec slacks(const vec& p) const { return A * p - c; }
  std::size_t lower_bound_row() const;
  std::size_t count(RowTag t) const;
};

struct InitialPolytope {
  Polytope polytope;
  vec p0;
  double tau0 = 0.0;
};

/// Box [-1/eps, 1/eps]^n plus the lower-bound row 1ᵀp >= -sqrt(n)/eps.
InitialPolytope init_polytope(std::size_t n, double epsilon);

struct SolverConfig {
  double epsilon = 1e-7;
  double theta = 0.7;
  double newton_tol = 1e-6;
  std::size_t max_newton = 500;
  std::size_t max_iterations = 20000;
  vec objective;  // empty means all ones

  void validate(std::size_t n) const;
  vec objective_or_ones(std::size_t n) const;
};

struct CenteringStats {
  std::size_t newton_steps = 0;
  double decrement = 0.0;
};

/// Approximate minimizer of objᵀp/tau - sum log(slack) from a strictly
/// interior start.
vec tau_center(const Polytope& poly, double tau, const vec& p_start, const SolverConfig& config,
               CenteringStats* stats = nullptr);

/// a_jᵀ H⁻¹ a_j / s_j² with H the barrier Hessian at p.
double variational_quantity(const Polytope& poly, const vec& p, double tau, std::size_t j);
vec variational_quantities(const Polytope& poly, const vec& p);

/// Appends the row keeping normalᵀ(p - through_point) <= 0. Returns the new
/// row index. The row's reference slack is set at the next center.
std::size_t add_cut(Polytope& poly, const vec& normal, const vec& through_point, int owner = -1,
                    double provisional_pi = 1e-6);

void drop_constraint(Polytope& poly, std::size_t j);

/// normalᵀp >= rhs
struct LinearRow {
  vec normal;
  double rhs = 0.0;
};

struct Bounds {
  vec lower;  // -inf allowed
  vec upper;  // +inf allowed
  std::vector<LinearRow> rows;

  static Bounds nonnegative(std::size_t n);
};

enum class SolveStatus { Optimal, InfeasibleOrUnbounded, IterationCap };
enum class ExitTest { None, T1, T2, T3 };

std::string to_string(SolveStatus s);
std::string to_string(ExitTest e);

struct SolveOutcome {
  SolveStatus status = SolveStatus::InfeasibleOrUnbounded;
  ExitTest exit_test = ExitTest::None;
  std::optional<vec> p_best;
  double objective_value = std::numeric_limits<double>::infinity();
  double lower_bound = -std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  std::size_t cuts_added = 0;
  std::size_t cuts_dropped = 0;
  std::size_t newton_steps = 0;
  std::size_t rows = 0;
  double final_tau = 0.0;
  std::string note;  // why T2 fired, when it was the numerical guard
  std::vector<LinearRow> cut_log;  // every cut ever added, as normalᵀp >= rhs
};

struct TraceRecord {
  std::size_t iter = 0;
  std::size_t N = 0;
  double tau = 0.0;
  std::string step;  // drop, reset, cut, shrink, optimal
  double lower_bound = 0.0;
  double objective = 0.0;
  double min_slack = 0.0;
};

using TraceSink = std::function<void(const TraceRecord&)>;

/// Writes a header plus one CSV row per record.
TraceSink csv_trace(std::ostream& out);

inline std::size_t t1_row_limit(std::size_t n, double epsilon) {
  return static_cast<std::size_t>(4093.0 * static_cast<double>(n) * std::log2(1.0 / epsilon));
}

inline double t2_slack_limit(std::size_t n, double epsilon) {
  return 1e-5 * epsilon * epsilon * epsilon /
         (2.0 * std::pow(static_cast<double>(n), 1.5) * std::log2(1.0 / epsilon));
}

/// Feasibility as accepted at a center: inf_t G <= 1e-8 (1 + |G|).
inline bool within_feasibility_tolerance(double g) { return g <= 1e-8 * (1.0 + std::abs(g)); }

/// `start` must be strictly inside the bounds and extra rows; by default the
/// box midpoint is used.
SolveOutcome solve(const std::vector<std::shared_ptr<const ConstraintOracle>>& oracles, const Bounds& bounds,
                   const SolverConfig& config, std::optional<vec> start = std::nullopt,
                   const TraceSink& trace = {});

}  // namespace ccpower
