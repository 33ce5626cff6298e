#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numeric>
#include <sstream>

#include <boost/math/distributions/non_central_chi_squared.hpp>

#include "ccpower/montecarlo.hpp"
#include "ccpower/problems.hpp"
#include "support.hpp"

using namespace ccpower;
using testing::manual_interference;

namespace {

BroadcastScenario scalar_broadcast(double h, double sigma2, double eta2, double mu, double phi) {
  cmat H(1, 1);
  H << h;
  return make_broadcast_scenario(H, {vec::Constant(1, sigma2)}, vec::Constant(1, eta2), vec::Constant(1, mu),
                                 vec::Constant(1, phi));
}

// Powers a factor above what each link needs without interference; outage
// rates land between a few percent and a few tens of percent.
vec moderate_powers(const InterferenceScenario& s, double factor = 1.5) {
  vec p(static_cast<Eigen::Index>(s.K));
  for (std::size_t k = 0; k < s.K; ++k) p[static_cast<Eigen::Index>(k)] = factor * s.eta2[k] / s.cross_gain(k, k);
  return p;
}

bool same(const OutageReport& a, const OutageReport& b) {
  return a.violations == b.violations && a.rate == b.rate && a.halfwidth == b.halfwidth && a.pass == b.pass;
}

}  // namespace

TEST_CASE("zero SINR target is never missed by an active link") {
  InterferenceParams params;
  auto s = generate_interference_scenario(params);
  s.alpha.assign(s.K, 0.0);
  const auto r = estimate_outage(s, vec::Constant(3, 0.5), 10000, 1);
  for (std::size_t k = 0; k < 3; ++k) CHECK(r.violations[k] == 0);

  vec p = vec::Constant(3, 0.5);
  p[1] = 0.0;
  const auto idle = estimate_outage(s, p, 10000, 1);
  CHECK(idle.violations[1] == 10000);
}

TEST_CASE("single-link outage matches the noncentral chi-square CDF") {
  std::vector<std::vector<cvec>> h(1, std::vector<cvec>(1));
  h[0][0] = cvec(3);
  h[0][0] << std::complex<double>(0.6, 0.2), std::complex<double>(-0.3, 0.5), 0.4;
  for (double sigma2 : {0.1, 0.3}) {
    for (double p : {1.0, 2.5}) {
      const auto s = manual_interference(h, sigma2, 1.0, 0.8, 0.1);
      // h^H g with unit g is |h_hat^H g + e|^2, e ~ CN(0, sigma2); scaled by
      // 2/sigma2 it is noncentral chi-square with 2 degrees of freedom.
      const double lambda = s.cross_gain(0, 0) * 2.0 / sigma2;
      const double x = s.alpha[0] * s.eta2[0] / p * 2.0 / sigma2;
      const double exact = boost::math::cdf(boost::math::non_central_chi_squared(2.0, lambda), x);
      const std::size_t n = 100000;
      const auto r = estimate_outage(s, vec::Constant(1, p), n, 3);
      const auto w = wilson_interval(r.violations[0], n);
      INFO("sigma2 ", sigma2, " p ", p, " exact ", exact, " rate ", r.rate[0]);
      CHECK(exact >= w.lo());
      CHECK(exact <= w.hi());
    }
  }
}

TEST_CASE("reports are deterministic and independent of the worker count") {
  InterferenceParams params;
  params.kappa = 0.3;
  const auto s = generate_interference_scenario(params);
  const vec p = moderate_powers(s);
  const auto a = estimate_outage(s, p, 20000, 9, 1);
  CHECK(same(a, estimate_outage(s, p, 20000, 9, 1)));
  CHECK(same(a, estimate_outage(s, p, 20000, 9, 3)));
  CHECK(same(a, estimate_outage(s, p, 20000, 9, 16)));
  CHECK_FALSE(same(a, estimate_outage(s, p, 20000, 10, 1)));

  BroadcastParams bp;
  bp.sigma2 = 0.02;
  const auto b = generate_broadcast_scenario(bp);
  const vec q = vec::Constant(3, 0.5);
  const auto m = estimate_mse_satisfaction(b, q, 20000, 4, 1);
  CHECK(same(m, estimate_mse_satisfaction(b, q, 20000, 4, 7)));
  const auto h1 = histogram_mse(b, q, 20000, 10, 4);
  const auto h2 = histogram_mse(b, q, 20000, 10, 4);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(h1[k].counts == h2[k].counts);
    CHECK(h1[k].edges == h2[k].edges);
  }
}

TEST_CASE("MSE exactly at the target counts as satisfied") {
  const auto b = scalar_broadcast(1.0, 0.0, 0.5, 0.25, 0.9);
  const auto r = estimate_mse_satisfaction(b, vec::Constant(1, 2.0), 5000, 1);
  CHECK(r.violations[0] == 0);
  CHECK(r.satisfaction(0) == 1.0);
  CHECK(r.target[0] == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("scalar MSE satisfaction matches the exponential law") {
  // |delta|^2 is exponential with mean sigma2.
  const double h = 0.8, sigma2 = 0.05, eta2 = 0.1, mu = 0.3, q = 0.6;
  const auto b = scalar_broadcast(h, sigma2, eta2, mu, 0.9);
  const double g2 = 1.0 / (h * h);
  const double x = (mu * q - eta2) / (g2 * q);
  const double exact = 1.0 - std::exp(-x / sigma2);
  const std::size_t n = 100000;
  const auto r = estimate_mse_satisfaction(b, vec::Constant(1, q), n, 8);
  const auto w = wilson_interval(n - r.violations[0], n);
  CHECK(exact >= w.lo());
  CHECK(exact <= w.hi());
}

TEST_CASE("MSE histograms") {
  BroadcastParams bp;
  bp.seed = 2;
  const auto b = generate_broadcast_scenario(bp);
  const auto sol = solve_mse_power_min(b);
  REQUIRE(sol.status == SolveStatus::Optimal);
  const std::size_t n = 50000;
  const auto hist = histogram_mse(b, sol.p_star, n, 40, 5);
  REQUIRE(hist.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& hk = hist[k];
    CHECK(hk.edges.size() == 41);
    CHECK(std::accumulate(hk.counts.begin(), hk.counts.end(), std::size_t{0}) == n);
    CHECK(std::is_sorted(hk.edges.begin(), hk.edges.end()));
    // Mass in bins lying wholly at or below mu.
    std::size_t below = 0;
    for (std::size_t i = 0; i < hk.counts.size(); ++i)
      if (hk.edges[i + 1] <= b.mu[k]) below += hk.counts[i];
    CHECK(static_cast<double>(below) >= b.phi[k] * static_cast<double>(n));
  }

  auto exact = b;
  for (auto& l : exact.Lambda) l.setZero();
  const vec q = vec::Constant(3, 0.7);
  const auto point = histogram_mse(exact, q, 5000, 8, 1);
  for (std::size_t k = 0; k < 3; ++k) {
    const double v = exact.eta2[k] / q[k];
    std::size_t nonzero = 0;
    for (std::size_t i = 0; i < point[k].counts.size(); ++i) {
      if (point[k].counts[i] == 0) continue;
      ++nonzero;
      CHECK(point[k].counts[i] == 5000);
      CHECK(point[k].edges[i] <= v);
      CHECK(v <= point[k].edges[i + 1]);
    }
    CHECK(nonzero == 1);
  }
  CHECK_THROWS_AS(histogram_mse(b, q, 5000, 1, 1), std::invalid_argument);
}

TEST_CASE("Wilson half-widths") {
  const auto w = wilson_interval(0, 1000);
  CHECK(w.lo() <= 1e-15);
  CHECK(w.hi() > 0.0);
  CHECK(wilson_interval(1000, 1000).hi() >= 1.0 - 1e-15);

  InterferenceParams params;
  params.kappa = 0.3;
  const auto s = generate_interference_scenario(params);
  const vec p = moderate_powers(s);
  const auto a = estimate_outage(s, p, 100000, 2);
  const auto b = estimate_outage(s, p, 200000, 2);
  for (std::size_t k = 0; k < 3; ++k) {
    REQUIRE(a.rate[k] >= 0.01);
    INFO("user ", k, " rate ", a.rate[k]);
    CHECK(std::abs(b.halfwidth[k] / a.halfwidth[k] * std::sqrt(2.0) - 1.0) <= 0.05);
  }
  CHECK_THROWS_AS(estimate_outage(s, p, 999, 2), std::invalid_argument);
}

TEST_CASE("CSV layouts") {
  OutageReport r;
  r.n_samples = 1000;
  r.rate = {0.01};
  r.halfwidth = {0.002};
  r.target = {0.05};
  r.pass = {true};
  r.violations = {10};
  std::ostringstream os;
  write_report_csv(os, "seed1", r);
  CHECK(os.str() == "scenario_id,user,rate,halfwidth,target,pass\nseed1,0,0.01,0.002,0.05,true\n");

  std::ostringstream hs;
  write_histogram_csv(hs, {Histogram{{0.0, 0.5, 1.0}, {3, 4}}});
  CHECK(hs.str() == "user,bin_lo,bin_hi,count\n0,0,0.5,3\n0,0.5,1,4\n");
}
