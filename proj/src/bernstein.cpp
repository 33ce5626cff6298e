#include "ccpower/bernstein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ccpower/errors.hpp"

namespace ccpower {

double log_mgf_noncentral_chi2(double t, double lambda) {
  if (!(t < 0.5)) throw DomainError("noncentral chi-square MGF needs t < 1/2, got " + std::to_string(t));
  if (lambda < 0.0) throw std::invalid_argument("noncentrality must be nonnegative");
  return lambda * t / (1.0 - 2.0 * t) - std::log1p(-2.0 * t);
}

// ---------------------------------------------------------------------------
// Interference channel

InterferenceOracle::InterferenceOracle(const InterferenceScenario& s, std::size_t k)
    : InterferenceOracle(s, k, s.alpha.at(k)) {}

InterferenceOracle::InterferenceOracle(const InterferenceScenario& s, std::size_t k, double sinr_target)
    : K_(s.K),
      k_(k),
      alpha_(sinr_target),
      eta2_(s.eta2.at(k)),
      log_eps_(std::log(s.eps.at(k))),
      signal_gain_(s.cross_gain(k, k)),
      signal_spread_(s.sigma2[k][k] * s.spread(k)),
      cross_gain_(vec::Zero(s.K)),
      cross_spread_(vec::Zero(s.K)) {
  if (!(sinr_target >= 0.0)) throw std::invalid_argument("SINR target must be nonnegative");
  for (std::size_t j = 0; j < K_; ++j) {
    if (j == k) continue;
    cross_gain_[j] = s.cross_gain(k, j);
    cross_spread_[j] = s.sigma2[k][j] * s.spread(j);
  }
}

double InterferenceOracle::t_lower(const vec& p) const {
  double rho = 0.0;
  for (std::size_t j = 0; j < K_; ++j)
    if (j != k_) rho = std::max(rho, alpha_ * cross_spread_[j] * p[j]);
  // Only reachable for negative p_k: keeps 1 + p_k s/t positive.
  rho = std::max(rho, -signal_spread_ * p[k_]);
  return rho;
}

double InterferenceOracle::value(const vec& p, double t) const {
  if (p.size() != static_cast<Eigen::Index>(K_)) throw std::invalid_argument("power vector has wrong size");
  if (!(t > t_lower(p))) throw DomainError("t is not above the interference-constraint bound");
  double G = alpha_ * eta2_;
  for (std::size_t j = 0; j < K_; ++j) {
    if (j == k_) continue;
    const double u = alpha_ * cross_spread_[j] * p[j] / t;
    G += alpha_ * cross_gain_[j] * p[j] / (1.0 - u) - t * std::log1p(-u);
  }
  const double w = signal_spread_ * p[k_] / t;
  G -= signal_gain_ * p[k_] / (1.0 + w) - t * std::log1p(w);
  G -= t * log_eps_;
  return G;
}

vec InterferenceOracle::gradient(const vec& p, double t) const {
  if (p.size() != static_cast<Eigen::Index>(K_)) throw std::invalid_argument("power vector has wrong size");
  if (!(t > t_lower(p))) throw DomainError("t is not above the interference-constraint bound");
  vec grad(K_);
  for (std::size_t j = 0; j < K_; ++j) {
    if (j == k_) continue;
    const double one_minus_u = 1.0 - alpha_ * cross_spread_[j] * p[j] / t;
    grad[j] = alpha_ * cross_gain_[j] / (one_minus_u * one_minus_u) + alpha_ * cross_spread_[j] / one_minus_u;
  }
  const double one_plus_w = 1.0 + signal_spread_ * p[k_] / t;
  grad[k_] = -signal_gain_ / (one_plus_w * one_plus_w) + signal_spread_ / one_plus_w;
  return grad;
}

// ---------------------------------------------------------------------------
// Broadcast channel

MseOracle::MseOracle(const BroadcastScenario& s, std::size_t k)
    : K_(s.K),
      k_(k),
      eta2_(s.eta2[k]),
      mu_(s.mu[k]),
      log_miss_(std::log1p(-s.phi[k])),
      U_(s.Lambda.at(k).cwiseSqrt().asDiagonal() * s.G) {}

cmat MseOracle::weighted_covariance(const vec& q) const {
  if (q.size() != static_cast<Eigen::Index>(K_)) throw std::invalid_argument("power vector has wrong size");
  return U_ * q.asDiagonal() * U_.adjoint();
}

vec MseOracle::spectrum(const vec& q) const {
  Eigen::SelfAdjointEigenSolver<cmat> eig(weighted_covariance(q), Eigen::EigenvaluesOnly);
  return eig.eigenvalues();
}

double MseOracle::t_lower(const vec& q) const { return std::max(0.0, 2.0 * spectrum(q).maxCoeff()); }

double MseOracle::value(const vec& q, double t) const {
  const vec lambda = spectrum(q);
  if (!(t > 2.0 * lambda.maxCoeff()) || !(t > 0.0)) throw DomainError("t is inside the MSE-constraint spectral bound");
  double logdet = 0.0;
  for (Eigen::Index m = 0; m < lambda.size(); ++m) logdet += std::log1p(-2.0 * lambda[m] / t);
  return (eta2_ - q[k_] * mu_) - 0.5 * t * logdet - t * log_miss_;
}

vec MseOracle::gradient(const vec& q, double t) const {
  const cmat B = weighted_covariance(q);
  const auto M = B.rows();
  const cmat W = cmat::Identity(M, M) - (2.0 / t) * B;
  Eigen::LDLT<cmat> ldlt(W);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().real().array() > 0.0).all() || !(t > 0.0))
    throw DomainError("t is inside the MSE-constraint spectral bound");
  // d/dq_j [-(t/2) log det W] = u_j^H W^{-1} u_j
  const cmat WinvU = ldlt.solve(U_);
  vec grad(K_);
  for (std::size_t j = 0; j < K_; ++j) grad[j] = U_.col(j).dot(WinvU.col(j)).real();
  grad[k_] -= mu_;
  return grad;
}

// ---------------------------------------------------------------------------

double t_lower_interference(const InterferenceScenario& s, std::size_t k, const vec& p) {
  return InterferenceOracle(s, k).t_lower(p);
}

double eval_G_interference(const InterferenceScenario& s, std::size_t k, const vec& p, double t) {
  return InterferenceOracle(s, k).value(p, t);
}

vec grad_G_interference(const InterferenceScenario& s, std::size_t k, const vec& p, double t) {
  return InterferenceOracle(s, k).gradient(p, t);
}

double eval_G_mse(const BroadcastScenario& s, std::size_t k, const vec& q, double t) {
  return MseOracle(s, k).value(q, t);
}

vec grad_G_mse(const BroadcastScenario& s, std::size_t k, const vec& q, double t) {
  return MseOracle(s, k).gradient(q, t);
}

// ---------------------------------------------------------------------------
// Inner search over t

namespace {

struct Sample {
  double t;
  double g;
};

}  // namespace

InnerMinResult minimize_over_t(const ConstraintOracle& oracle, const vec& p, InnerMode mode,
                               std::optional<double> t_hint) {
  const double rho = oracle.t_lower(p);
  const double lo = t_domain_guard(rho);
  if (!(lo < kTMax)) throw DomainError("t-domain of the constraint is empty below t_max");

  InnerMinResult out;
  Sample best{lo, std::numeric_limits<double>::infinity()};
  std::vector<Sample> samples;
  samples.reserve(kBracketProbes + 1);

  auto eval = [&](double t) {
    const double g = oracle.value(p, t);
    ++out.evaluations;
    if (g < best.g) best = {t, g};
    return g;
  };
  auto finish = [&](bool bracketed) {
    out.t_star = best.t;
    out.g_value = best.g;
    out.feasible = best.g <= 0.0;
    out.bracketed = bracketed;
    return out;
  };

  if (t_hint && *t_hint > lo && *t_hint <= kTMax) {
    const double g = eval(*t_hint);
    samples.push_back({*t_hint, g});
    if (mode == InnerMode::FeasibilityCheck && g <= 0.0) return finish(true);
  }

  const double ratio = std::pow(kTMax / lo, 1.0 / (kBracketProbes - 1));
  double t = lo;
  for (int i = 0; i < kBracketProbes; ++i, t *= ratio) {
    const double ti = (i == kBracketProbes - 1) ? kTMax : t;
    const double g = eval(ti);
    samples.push_back({ti, g});
    if (mode == InnerMode::FeasibilityCheck && g <= 0.0) return finish(true);
  }

  std::sort(samples.begin(), samples.end(), [](const Sample& a, const Sample& b) { return a.t < b.t; });
  const auto it = std::min_element(samples.begin(), samples.end(),
                                   [](const Sample& a, const Sample& b) { return a.g < b.g; });
  const auto idx = static_cast<std::size_t>(it - samples.begin());
  if (idx + 1 == samples.size()) return finish(false);

  double a = samples[idx == 0 ? 0 : idx - 1].t;
  double b = samples[idx + 1].t;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double gc = eval(c);
  double gd = eval(d);
  while (b - a > 1e-8 * (1.0 + best.t)) {
    if (gc < gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - inv_phi * (b - a);
      gc = eval(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + inv_phi * (b - a);
      gd = eval(d);
    }
    if (mode == InnerMode::FeasibilityCheck && best.g <= 0.0) break;
  }
  return finish(true);
}

}  // namespace ccpower
