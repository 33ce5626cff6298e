#pragma once

// Deterministic convex replacements of the SINR and MSE outage constraints.
//
// Each constraint has the form  inf_{t > t_lower(p)} G(p, t) <= 0,  with G
// jointly convex where it matters and (empirically) unimodal in t. The
// oracles below expose G, its gradient in the decision variables, and the
// lower end of the t-domain; minimize_over_t performs the inner search.

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ccpower/model.hpp"

namespace ccpower {

/// log E[exp(t X)] for X noncentral chi-square with two degrees of freedom
/// and noncentrality lambda. Requires t < 1/2.
double log_mgf_noncentral_chi2(double t, double lambda);

class ConstraintOracle {
 public:
  virtual ~ConstraintOracle() = default;

  virtual std::size_t dimension() const = 0;
  virtual std::size_t user() const = 0;

  /// G is finite only for t strictly above this bound.
  virtual double t_lower(const vec& p) const = 0;
  virtual double value(const vec& p, double t) const = 0;
  virtual vec gradient(const vec& p, double t) const = 0;
};

/// SINR outage constraint of receiver k in the interference channel.
class InterferenceOracle final : public ConstraintOracle {
 public:
  InterferenceOracle(const InterferenceScenario& scenario, std::size_t k);
  /// Same constraint with the SINR target replaced by `sinr_target`.
  InterferenceOracle(const InterferenceScenario& scenario, std::size_t k, double sinr_target);

  std::size_t dimension() const override { return K_; }
  std::size_t user() const override { return k_; }
  double t_lower(const vec& p) const override;
  double value(const vec& p, double t) const override;
  vec gradient(const vec& p, double t) const override;

 private:
  std::size_t K_;
  std::size_t k_;
  double alpha_;
  double eta2_;
  double log_eps_;
  double signal_gain_;    // |h_kk^H g_k|^2
  double signal_spread_;  // sigma_kk^2 |1^T g_k|^2
  vec cross_gain_;        // |h_kj^H g_j|^2, zero at j = k
  vec cross_spread_;      // sigma_kj^2 |1^T g_j|^2, zero at j = k
};

/// MSE outage constraint of user k in the broadcast channel; decision
/// variables are the diagonal power loadings q.
class MseOracle final : public ConstraintOracle {
 public:
  MseOracle(const BroadcastScenario& scenario, std::size_t k);

  std::size_t dimension() const override { return K_; }
  std::size_t user() const override { return k_; }
  double t_lower(const vec& q) const override;
  double value(const vec& q, double t) const override;
  vec gradient(const vec& q, double t) const override;

  /// Eigenvalues of Lambda^{1/2} G Q G^H Lambda^{1/2}, ascending.
  vec spectrum(const vec& q) const;
  /// Lambda^{1/2} G Q G^H Lambda^{1/2}.
  cmat weighted_covariance(const vec& q) const;

 private:
  std::size_t K_;
  std::size_t k_;
  double eta2_;
  double mu_;
  double log_miss_;  // log(1 - phi)
  cmat U_;           // M x K, column j = Lambda_k^{1/2} G[:, j]
};

// Free-function forms over a scenario, one oracle per call.
double t_lower_interference(const InterferenceScenario& s, std::size_t k, const vec& p);
double eval_G_interference(const InterferenceScenario& s, std::size_t k, const vec& p, double t);
vec grad_G_interference(const InterferenceScenario& s, std::size_t k, const vec& p, double t);
double eval_G_mse(const BroadcastScenario& s, std::size_t k, const vec& q, double t);
vec grad_G_mse(const BroadcastScenario& s, std::size_t k, const vec& q, double t);

enum class InnerMode { FeasibilityCheck, FullMinimize };

struct InnerMinResult {
  double t_star = 0.0;
  double g_value = 0.0;     // G at t_star; an upper bound on the infimum
  bool feasible = false;    // some sampled t gave G <= 0
  bool bracketed = true;    // false when the search ran into t_max
  std::size_t evaluations = 0;
};

inline constexpr double kTMax = 1e12;
inline constexpr int kBracketProbes = 32;

/// Left edge of the searched t-interval for a given lower bound.
inline double t_domain_guard(double rho) { return rho * (1.0 + 1e-9) + 1e-12; }

/// Safeguarded golden-section search over t in (t_lower(p), kTMax].
/// In feasibility-check mode the search stops at the first t with G <= 0;
/// `t_hint` (when inside the domain) is always probed first.
InnerMinResult minimize_over_t(const ConstraintOracle& oracle, const vec& p, InnerMode mode,
                               std::optional<double> t_hint = std::nullopt);

}  // namespace ccpower
