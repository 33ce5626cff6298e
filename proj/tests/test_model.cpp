#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <boost/math/distributions/non_central_chi_squared.hpp>

#include "ccpower/errors.hpp"
#include "ccpower/montecarlo.hpp"
#include "ccpower/scenario_io.hpp"
#include "support.hpp"

using namespace ccpower;
using testing::manual_interference;
using testing::scalar_interference;

TEST_CASE("path loss is one at the reference distance") {
  CHECK(path_loss_amplitude(200.0) == 1.0);
  CHECK(Geometry::linear(3).distance(1, 1) == 200.0);
  CHECK(Geometry::linear(3).distance(0, 1) == doctest::Approx(std::hypot(400.0, 200.0)));
}

TEST_CASE("shadowing has an 8 dB standard deviation") {
  Engine engine = make_engine(11, Stream::Test);
  const int n = 1000000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = draw_shadowing_db(engine);
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sum2 / n - mean * mean);
  CHECK(std::abs(sd - 8.0) <= 0.05);
}

TEST_CASE("kappa maps to an error-to-estimate variance ratio of kappa squared") {
  InterferenceParams p;
  p.kappa = 0.10;
  const auto s = generate_interference_scenario(p);
  for (std::size_t k = 0; k < s.K; ++k)
    for (std::size_t j = 0; j < s.K; ++j) CHECK(std::abs(s.sigma2[k][j] / s.est_var[k][j] - 0.01) <= 1e-12);
}

TEST_CASE("coincident transmitter and receiver is rejected") {
  InterferenceParams p;
  p.K = 2;
  p.tx_coordinates = std::vector<Point2>{{0, 0}, {400, 0}};
  p.rx_coordinates = std::vector<Point2>{{0, 200}, {400, 0}};
  CHECK_THROWS_AS(generate_interference_scenario(p), InvalidGeometry);
}

TEST_CASE("generation is a pure function of the recipe") {
  InterferenceParams p;
  p.seed = 42;
  CHECK(fingerprint(generate_interference_scenario(p)) == fingerprint(generate_interference_scenario(p)));
  InterferenceParams q = p;
  q.seed = 43;
  CHECK(fingerprint(generate_interference_scenario(p)) != fingerprint(generate_interference_scenario(q)));
}

TEST_CASE("channel-matched beamformers") {
  std::vector<std::vector<cvec>> h(1, std::vector<cvec>(1));
  h[0][0] = cvec(3);
  h[0][0] << 2.0, 0.0, 0.0;
  auto s = manual_interference(h, 0.1, 1.0, 1.0, 0.1);
  CHECK(std::abs(s.g[0][0] - std::complex<double>(1.0, 0.0)) == 0.0);
  CHECK(std::abs(s.g[0][1]) == 0.0);

  h[0][0] = cvec(2);
  h[0][0] << std::complex<double>(1, 1), std::complex<double>(1, -1);
  s = manual_interference(h, 0.1, 1.0, 1.0, 0.1);
  const auto inner = h[0][0].dot(s.g[0]);
  CHECK(std::abs(inner.imag()) <= 1e-15);
  CHECK(inner.real() == doctest::Approx(h[0][0].norm()).epsilon(1e-15));

  InterferenceParams p;
  p.K = 4;
  p.M = 5;
  const auto r = generate_interference_scenario(p);
  for (const auto& g : r.g) CHECK(std::abs(g.norm() - 1.0) <= 1e-12);

  h[0][0] = cvec::Zero(3);
  CHECK_THROWS_AS(manual_interference(h, 0.1, 1.0, 1.0, 0.1), DegenerateChannel);
}

TEST_CASE("realizations") {
  InterferenceParams p;
  auto s = generate_interference_scenario(p);

  SUBCASE("same seed gives the same draw") {
    const auto a = realize_channels(s, 5);
    const auto b = realize_channels(s, 5);
    for (std::size_t k = 0; k < s.K; ++k)
      for (std::size_t j = 0; j < s.K; ++j) CHECK((a.h[k][j].array() == b.h[k][j].array()).all());
  }

  SUBCASE("zero error variance reproduces the estimate") {
    for (auto& row : s.sigma2) row.assign(s.K, 0.0);
    const auto a = realize_channels(s, 5);
    for (std::size_t k = 0; k < s.K; ++k)
      for (std::size_t j = 0; j < s.K; ++j) CHECK((a.h[k][j].array() == s.h_hat[k][j].array()).all());
  }

  SUBCASE("error variance per component") {
    auto one = scalar_interference({{1.0}}, 0.3, 1.0, 1.0, 0.1);
    Engine engine = make_engine(3, Stream::Test);
    InterferenceRealization r;
    const int n = 1000000;
    double acc = 0.0, re2 = 0.0;
    for (int i = 0; i < n; ++i) {
      realize_channels(one, engine, r);
      const auto d = r.h[0][0][0] - one.h_hat[0][0][0];
      acc += std::norm(d);
      re2 += d.real() * d.real();
    }
    CHECK(std::abs(acc / n - 0.3) <= 0.003);
    CHECK(std::abs(re2 / n - 0.15) <= 0.0015);
  }
}

TEST_CASE("SINR") {
  const auto s1 = scalar_interference({{1.0}}, 0.1, 0.5, 1.0, 0.1);
  InterferenceRealization r;
  r.h = s1.h_hat;
  CHECK(compute_sinr(r, s1, vec::Constant(1, 2.0))[0] == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(compute_sinr(r, s1, vec::Zero(1))[0] == 0.0);

  InterferenceParams p;
  p.K = 2;
  p.M = 3;
  const auto s = generate_interference_scenario(p);
  const auto real = realize_channels(s, 9);
  vec pw(2);
  pw << 0.7, 1.3;
  const vec got = compute_sinr(real, s, pw);
  for (std::size_t k = 0; k < 2; ++k) {
    // Scalar re-evaluation of h^H g sums.
    auto gain = [&](std::size_t kk, std::size_t j) {
      std::complex<double> acc = 0.0;
      for (std::size_t m = 0; m < s.M; ++m) acc += std::conj(real.h[kk][j][m]) * s.g[j][m];
      return std::norm(acc);
    };
    const std::size_t other = 1 - k;
    const double want = pw[k] * gain(k, k) / (s.eta2[k] + pw[other] * gain(k, other));
    CHECK(std::abs(got[k] - want) <= 1e-12 * want);
  }

  SUBCASE("scale consistency") {
    auto scaled = s;
    for (auto& e : scaled.eta2) e *= 7.5;
    const vec again = compute_sinr(real, scaled, 7.5 * pw);
    for (Eigen::Index k = 0; k < 2; ++k) CHECK(std::abs(again[k] - got[k]) <= 1e-12 * got[k]);
  }
}

TEST_CASE("single-link outage matches the noncentral chi-square law") {
  // |h^H g|^2 normalized by sigma^2/2 is noncentral chi-square with two
  // degrees of freedom when g = e_1.
  std::vector<std::vector<cvec>> h(1, std::vector<cvec>(1));
  h[0][0] = cvec(2);
  h[0][0] << 1.2, 0.0;
  auto s = manual_interference(h, 0.5, 1.0, 1.0, 0.1);
  const double p = 1.5;
  const double lambda = std::norm(h[0][0][0]) / (0.5 / 2.0);
  const double threshold = s.alpha[0] * s.eta2[0] / p / (0.5 / 2.0);
  const double exact = boost::math::cdf(boost::math::non_central_chi_squared(2.0, lambda), threshold);

  const std::size_t n = 100000;
  Engine engine = make_engine(21, Stream::Test);
  InterferenceRealization r;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    realize_channels(s, engine, r);
    if (compute_sinr(r, s, vec::Constant(1, p))[0] <= s.alpha[0]) ++hits;
  }
  const auto w = wilson_interval(hits, n);
  CHECK(exact >= w.lo());
  CHECK(exact <= w.hi());
}

TEST_CASE("MSE") {
  cmat H(1, 1);
  H << 1.0;
  const auto s = make_broadcast_scenario(H, {vec::Constant(1, 0.01)}, vec::Constant(1, 0.1), vec::Constant(1, 0.5),
                                         vec::Constant(1, 0.9));
  BroadcastRealization r;
  r.Delta = cmat::Zero(1, 1);
  CHECK(compute_mse(r, s, vec::Constant(1, 2.0))[0] == doctest::Approx(0.05).epsilon(1e-15));

  r.Delta(0, 0) = {0.3, -0.4};
  const double q = 1.7;
  const double want = (0.25 * q + 0.1) / q;  // |delta|^2 g^2 q + eta^2 over q with g = 1
  CHECK(compute_mse(r, s, vec::Constant(1, q))[0] == doctest::Approx(want).epsilon(1e-14));

  CHECK_THROWS_AS(compute_mse(r, s, vec::Constant(1, 0.0)), InvalidPower);

  BroadcastParams bp;
  const auto b = generate_broadcast_scenario(bp);
  BroadcastRealization zero;
  zero.Delta = cmat::Zero(3, 3);
  vec q3(3);
  q3 << 0.5, 1.0, 2.0;
  const vec m1 = compute_mse(zero, b, q3);
  const vec m2 = compute_mse(zero, b, 2.0 * q3);
  for (Eigen::Index k = 0; k < 3; ++k) {
    CHECK(m1[k] == b.eta2[k] / q3[k]);
    CHECK(m2[k] == doctest::Approx(m1[k] / 2.0).epsilon(1e-15));
  }
}

TEST_CASE("broadcast pseudoinverse") {
  BroadcastParams bp;
  bp.K = 3;
  bp.M = 4;
  const auto b = generate_broadcast_scenario(bp);
  CHECK((b.H_hat * b.G - cmat::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-9);

  cmat H = cmat::Zero(2, 2);
  H(0, 0) = 1.0;
  H(1, 0) = 2.0;
  CHECK_THROWS_AS(make_broadcast_scenario(H, {vec::Zero(2), vec::Zero(2)}, vec::Ones(2), vec::Ones(2),
                                          vec::Constant(2, 0.9)),
                  DegenerateChannel);
}

TEST_CASE("scenario recipes round-trip through YAML") {
  InterferenceParams p;
  p.kappa = 0.1;  // not exactly representable
  p.alpha = 1.0 / 3.0;
  p.seed = 123456789012345ULL;
  p.caps.total = 2.5;
  p.variance = VarianceConvention::Norm;
  const auto text = to_yaml(p);
  const auto back = parse_interference_params(text);
  CHECK(back == p);
  CHECK(to_yaml(back) == text);

  p.tx_coordinates = std::vector<Point2>{{0.1, 0.0}, {400.0, 0.3}, {800.0, 0.0}};
  p.rx_coordinates = std::vector<Point2>{{0.0, 200.0}, {400.0, 200.0}, {800.0, 200.7}};
  CHECK(parse_interference_params(to_yaml(p)) == p);

  BroadcastParams b;
  b.sigma2 = 1.5e-3;
  CHECK(parse_broadcast_params(to_yaml(b)) == b);
}

TEST_CASE("schema errors name the key and line") {
  const std::string text = "K: 3\nM: 3\nkappa: 0.1\neps: 0.05\nalpha: 1\nseed: 1\nkapa: 0.2\n";
  try {
    parse_interference_params(text);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "kapa");
    CHECK(e.line() == 7);
  }
  try {
    parse_interference_params("K: 3\nM: 3\nkappa: 1.5\neps: 0.05\nalpha: 1\nseed: 1\n");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "kappa");
    CHECK(e.line() == 3);
  }
}
