#pragma once

// Hand-built instances and brute-force oracles shared by the tests.

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "ccpower/bernstein.hpp"
#include "ccpower/model.hpp"

namespace testing {

using namespace ccpower;

/// Interference instance from explicit channel estimates; beamformers are
/// channel matched.
inline InterferenceScenario manual_interference(const std::vector<std::vector<cvec>>& h, double sigma2, double eta2,
                                                double alpha, double eps) {
  InterferenceScenario s;
  s.K = h.size();
  s.M = static_cast<std::size_t>(h[0][0].size());
  s.h_hat = h;
  s.sigma2.assign(s.K, std::vector<double>(s.K, sigma2));
  s.est_var.assign(s.K, std::vector<double>(s.K, 1.0));
  s.eta2.assign(s.K, eta2);
  s.alpha.assign(s.K, alpha);
  s.eps.assign(s.K, eps);
  make_channel_matched_beamformers(s);
  return s;
}

/// Single-antenna instance with |h_kj|^2 = gains[k][j].
inline InterferenceScenario scalar_interference(const std::vector<std::vector<double>>& gains, double sigma2,
                                                double eta2, double alpha, double eps) {
  std::vector<std::vector<cvec>> h(gains.size(), std::vector<cvec>(gains.size()));
  for (std::size_t k = 0; k < gains.size(); ++k)
    for (std::size_t j = 0; j < gains.size(); ++j) h[k][j] = cvec::Constant(1, std::sqrt(gains[k][j]));
  return manual_interference(h, sigma2, eta2, alpha, eps);
}

/// inf over t of G by a log grid followed by a refined grid around the best
/// cell. Shares nothing with minimize_over_t beyond the oracle itself.
inline double grid_inf_t(const ConstraintOracle& o, const vec& p, std::size_t coarse = 20000,
                         std::size_t fine = 20000, double t_max = 1e12) {
  const double lo = o.t_lower(p) * (1.0 + 1e-9) + 1e-12;
  const double ratio = std::pow(t_max / lo, 1.0 / static_cast<double>(coarse - 1));
  double best = o.value(p, lo);
  std::size_t best_i = 0;
  double t = lo;
  for (std::size_t i = 1; i < coarse; ++i) {
    t *= ratio;
    const double g = o.value(p, t);
    if (g < best) {
      best = g;
      best_i = i;
    }
  }
  const double a = best_i == 0 ? lo : lo * std::pow(ratio, static_cast<double>(best_i) - 1.0);
  const double b = lo * std::pow(ratio, static_cast<double>(best_i) + 1.0);
  for (std::size_t i = 0; i <= fine; ++i) {
    const double ti = a + (b - a) * static_cast<double>(i) / static_cast<double>(fine);
    if (ti <= lo * (1.0 - 1e-15) || ti > t_max) continue;
    if (!(ti > o.t_lower(p))) continue;
    best = std::min(best, o.value(p, ti));
  }
  return best;
}

/// Smallest wᵀp over two users' reduced constraints on [0, hi]², by a
/// refined grid over p0 with a bisection for the least feasible p1 at each
/// grid value. Relies on user 1's constraint easing and user 0's tightening
/// as p1 grows, which holds wherever the signal term is decreasing.
inline double grid_min_2d(const ConstraintOracle& user0, const ConstraintOracle& user1, const vec& w, double hi,
                          std::size_t points = 401, int rounds = 6) {
  auto ok = [](const ConstraintOracle& o, double p0, double p1) {
    vec p(2);
    p << p0, p1;
    return minimize_over_t(o, p, InnerMode::FullMinimize).g_value <= 0.0;
  };
  auto value_at = [&](double p0) {
    if (!ok(user1, p0, hi)) return std::numeric_limits<double>::infinity();
    double lo = 0.0, up = hi;
    if (!ok(user1, p0, 0.0))
      for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + up);
        (ok(user1, p0, mid) ? up : lo) = mid;
      }
    else
      up = 0.0;
    if (!ok(user0, p0, up)) return std::numeric_limits<double>::infinity();
    return w[0] * p0 + w[1] * up;
  };
  double lo0 = 0.0, hi0 = hi, best = std::numeric_limits<double>::infinity(), best_p0 = 0.0;
  for (int r = 0; r < rounds; ++r) {
    const double h = (hi0 - lo0) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
      const double p0 = lo0 + h * static_cast<double>(i);
      const double v = value_at(p0);
      if (v < best) {
        best = v;
        best_p0 = p0;
      }
    }
    if (!std::isfinite(best)) return best;
    lo0 = std::max(0.0, best_p0 - 2.0 * h);
    hi0 = std::min(hi, best_p0 + 2.0 * h);
  }
  return best;
}

/// Central finite-difference gradient of G(., t).
inline vec fd_gradient(const ConstraintOracle& o, const vec& p, double t) {
  vec g(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double h = 1e-6 * (1.0 + std::abs(p[i]));
    vec hi = p, lo = p;
    hi[i] += h;
    lo[i] -= h;
    g[i] = (o.value(hi, t) - o.value(lo, t)) / (2.0 * h);
  }
  return g;
}

}  // namespace testing
