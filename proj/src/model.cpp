#include "ccpower/model.hpp"

#include <cstring>
#include <stdexcept>

#include "ccpower/errors.hpp"

namespace ccpower {

std::string to_string(VarianceConvention v) {
  return v == VarianceConvention::Paper ? "paper" : "norm";
}

VarianceConvention parse_variance_convention(const std::string& s) {
  if (s == "paper") return VarianceConvention::Paper;
  if (s == "norm") return VarianceConvention::Norm;
  throw std::invalid_argument("unknown variance convention '" + s + "' (expected paper|norm)");
}

Geometry Geometry::linear(std::size_t K, double link_distance, double spacing) {
  Geometry geo;
  for (std::size_t k = 0; k < K; ++k) {
    const double x = spacing * static_cast<double>(k);
    geo.tx.push_back({x, 0.0});
    geo.rx.push_back({x, link_distance});
  }
  return geo;
}

double Geometry::distance(std::size_t k, std::size_t j) const {
  return std::hypot(rx.at(k).x - tx.at(j).x, rx.at(k).y - tx.at(j).y);
}

Geometry InterferenceParams::geometry() const {
  if (tx_coordinates || rx_coordinates) {
    if (!tx_coordinates || !rx_coordinates)
      throw InvalidGeometry("both tx and rx coordinates are required");
    if (tx_coordinates->size() != K || rx_coordinates->size() != K)
      throw InvalidGeometry("coordinate lists must have K entries");
    return Geometry{*tx_coordinates, *rx_coordinates};
  }
  if (layout != "linear") throw InvalidGeometry("unknown layout '" + layout + "'");
  return Geometry::linear(K);
}

void InterferenceScenario::validate() const {
  if (K == 0 || M == 0) throw std::invalid_argument("scenario needs K >= 1 and M >= 1");
  if (h_hat.size() != K || sigma2.size() != K || eta2.size() != K || g.size() != K ||
      alpha.size() != K || eps.size() != K)
    throw std::invalid_argument("scenario arrays must have K entries");
  for (std::size_t k = 0; k < K; ++k) {
    if (h_hat[k].size() != K || sigma2[k].size() != K)
      throw std::invalid_argument("scenario per-link arrays must be K x K");
    for (std::size_t j = 0; j < K; ++j) {
      if (h_hat[k][j].size() != static_cast<Eigen::Index>(M))
        throw std::invalid_argument("channel estimate has wrong length");
      if (!(sigma2[k][j] > 0.0)) throw std::invalid_argument("sigma2 must be strictly positive");
    }
    if (!(eta2[k] > 0.0)) throw std::invalid_argument("eta2 must be strictly positive");
    if (!(eps[k] > 0.0 && eps[k] < 1.0)) throw std::invalid_argument("eps must lie in (0,1)");
    if (!(alpha[k] >= 0.0)) throw std::invalid_argument("alpha must be nonnegative");
    if (g[k].size() != static_cast<Eigen::Index>(M)) throw std::invalid_argument("beamformer has wrong length");
    if (std::abs(g[k].norm() - 1.0) > 1e-12) throw std::invalid_argument("beamformer must have unit norm");
  }
  if (p_bar) {
    if (p_bar->size() != K) throw std::invalid_argument("p_bar must have K entries");
    for (double v : *p_bar)
      if (!(v > 0.0)) throw std::invalid_argument("individual caps must be positive");
  }
  if (p_bar_tot && !(*p_bar_tot > 0.0)) throw std::invalid_argument("total cap must be positive");
}

double InterferenceScenario::cross_gain(std::size_t k, std::size_t j) const {
  return std::norm(h_hat[k][j].dot(g[j]));
}

double InterferenceScenario::spread(std::size_t j) const {
  if (variance == VarianceConvention::Norm) return g[j].squaredNorm();
  return std::norm(g[j].sum());
}

void BroadcastScenario::validate() const {
  if (K == 0 || M == 0) throw std::invalid_argument("broadcast scenario needs K, M >= 1");
  if (H_hat.rows() != static_cast<Eigen::Index>(K) || H_hat.cols() != static_cast<Eigen::Index>(M))
    throw std::invalid_argument("H_hat must be K x M");
  if (Lambda.size() != K || eta2.size() != static_cast<Eigen::Index>(K) ||
      mu.size() != static_cast<Eigen::Index>(K) || phi.size() != static_cast<Eigen::Index>(K))
    throw std::invalid_argument("broadcast per-user arrays must have K entries");
  for (const auto& l : Lambda) {
    if (l.size() != static_cast<Eigen::Index>(M)) throw std::invalid_argument("Lambda rows must have M entries");
    if ((l.array() < 0.0).any()) throw std::invalid_argument("Lambda must be nonnegative");
  }
  for (std::size_t k = 0; k < K; ++k) {
    if (!(eta2[k] > 0.0)) throw std::invalid_argument("eta2 must be positive");
    if (!(mu[k] > 0.0)) throw std::invalid_argument("mu must be positive");
    if (!(phi[k] > 0.0 && phi[k] < 1.0)) throw std::invalid_argument("phi must lie in (0,1)");
  }
  const cmat HG = H_hat * G;
  if ((HG - cmat::Identity(K, K)).cwiseAbs().maxCoeff() > 1e-9)
    throw DegenerateChannel("H_hat * G is not the identity; H_hat lacks full row rank");
}

double draw_shadowing_db(Engine& engine, double std_db) {
  std::normal_distribution<double> n(0.0, std_db);
  return n(engine);
}

void make_channel_matched_beamformers(InterferenceScenario& scenario) {
  scenario.g.resize(scenario.K);
  for (std::size_t k = 0; k < scenario.K; ++k) {
    const cvec& h = scenario.h_hat.at(k).at(k);
    const double n = h.norm();
    if (!(n > 0.0)) throw DegenerateChannel("direct-link estimate of user " + std::to_string(k) + " is zero");
    scenario.g[k] = h / n;
  }
}

InterferenceScenario generate_interference_scenario(const InterferenceParams& params) {
  if (params.K < 1 || params.M < 1) throw std::invalid_argument("K and M must be at least 1");
  if (!(params.kappa > 0.0 && params.kappa < 1.0)) throw std::invalid_argument("kappa must lie in (0,1)");
  const Geometry geo = params.geometry();

  InterferenceScenario s;
  s.K = params.K;
  s.M = params.M;
  s.variance = params.variance;
  s.h_hat.assign(s.K, std::vector<cvec>(s.K));
  s.sigma2.assign(s.K, std::vector<double>(s.K));
  s.est_var.assign(s.K, std::vector<double>(s.K));

  Engine engine = make_engine(params.seed, Stream::InterferenceScenario);
  for (std::size_t k = 0; k < s.K; ++k) {
    for (std::size_t j = 0; j < s.K; ++j) {
      const double d = geo.distance(k, j);
      if (!(d > 0.0)) throw InvalidGeometry("nonpositive distance between rx " + std::to_string(k) +
                                            " and tx " + std::to_string(j));
      const double shadow = db_to_linear(draw_shadowing_db(engine));
      const double amplitude = path_loss_amplitude(d) * shadow;
      cvec h(s.M);
      for (std::size_t m = 0; m < s.M; ++m) h[m] = amplitude * complex_normal(engine, 1.0);
      s.h_hat[k][j] = std::move(h);
      // Error std is kappa times the estimate std, per component.
      s.est_var[k][j] = amplitude * amplitude;
      s.sigma2[k][j] = params.kappa * params.kappa * s.est_var[k][j];
    }
  }
  s.eta2.assign(s.K, params.noise_power);
  s.alpha.assign(s.K, params.alpha);
  s.eps.assign(s.K, params.eps);
  if (params.caps.individual) s.p_bar = std::vector<double>(s.K, *params.caps.individual);
  if (params.caps.total) s.p_bar_tot = *params.caps.total;
  make_channel_matched_beamformers(s);
  s.validate();
  return s;
}

BroadcastScenario make_broadcast_scenario(cmat H_hat, std::vector<vec> Lambda, vec eta2, vec mu, vec phi) {
  BroadcastScenario s;
  s.K = static_cast<std::size_t>(H_hat.rows());
  s.M = static_cast<std::size_t>(H_hat.cols());
  if (s.K > s.M) throw DegenerateChannel("K x M channel with K > M cannot have full row rank");
  s.G = H_hat.completeOrthogonalDecomposition().pseudoInverse();
  s.H_hat = std::move(H_hat);
  s.Lambda = std::move(Lambda);
  s.eta2 = std::move(eta2);
  s.mu = std::move(mu);
  s.phi = std::move(phi);
  s.validate();
  return s;
}

BroadcastScenario generate_broadcast_scenario(const BroadcastParams& params) {
  if (!(params.sigma2 >= 0.0)) throw std::invalid_argument("sigma2 must be nonnegative");
  Engine engine = make_engine(params.seed, Stream::BroadcastScenario);
  cmat H(params.K, params.M);
  for (std::size_t k = 0; k < params.K; ++k)
    for (std::size_t m = 0; m < params.M; ++m) H(k, m) = complex_normal(engine, 1.0);
  std::vector<vec> Lambda(params.K, vec::Constant(params.M, params.sigma2));
  const auto K = static_cast<Eigen::Index>(params.K);
  return make_broadcast_scenario(std::move(H), std::move(Lambda), vec::Constant(K, params.noise_power),
                                 vec::Constant(K, db_to_linear(params.mu_dB)), vec::Constant(K, params.phi));
}

void realize_channels(const InterferenceScenario& scenario, Engine& engine, InterferenceRealization& out) {
  out.h.resize(scenario.K);
  for (std::size_t k = 0; k < scenario.K; ++k) {
    out.h[k].resize(scenario.K);
    for (std::size_t j = 0; j < scenario.K; ++j) {
      const cvec& est = scenario.h_hat[k][j];
      cvec& h = out.h[k][j];
      h.resize(est.size());
      for (Eigen::Index m = 0; m < est.size(); ++m) h[m] = est[m] + complex_normal(engine, scenario.sigma2[k][j]);
    }
  }
}

InterferenceRealization realize_channels(const InterferenceScenario& scenario, std::uint64_t seed) {
  Engine engine = make_engine(seed, Stream::Realization);
  InterferenceRealization out;
  out.seed = seed;
  realize_channels(scenario, engine, out);
  return out;
}

void realize_channels(const BroadcastScenario& scenario, Engine& engine, BroadcastRealization& out) {
  out.Delta.resize(scenario.K, scenario.M);
  for (std::size_t k = 0; k < scenario.K; ++k)
    for (std::size_t m = 0; m < scenario.M; ++m) out.Delta(k, m) = complex_normal(engine, scenario.Lambda[k][m]);
}

BroadcastRealization realize_channels(const BroadcastScenario& scenario, std::uint64_t seed) {
  Engine engine = make_engine(seed, Stream::Realization);
  BroadcastRealization out;
  out.seed = seed;
  realize_channels(scenario, engine, out);
  return out;
}

vec compute_sinr(const InterferenceRealization& realization, const InterferenceScenario& scenario, const vec& p) {
  const std::size_t K = scenario.K;
  if (p.size() != static_cast<Eigen::Index>(K)) throw std::invalid_argument("power vector must have K entries");
  vec sinr(K);
  for (std::size_t k = 0; k < K; ++k) {
    double interference = scenario.eta2[k];
    for (std::size_t j = 0; j < K; ++j)
      if (j != k) interference += p[j] * std::norm(realization.h[k][j].dot(scenario.g[j]));
    sinr[k] = p[k] * std::norm(realization.h[k][k].dot(scenario.g[k])) / interference;
  }
  return sinr;
}

vec compute_mse(const BroadcastRealization& realization, const BroadcastScenario& scenario, const vec& q) {
  const std::size_t K = scenario.K;
  if (q.size() != static_cast<Eigen::Index>(K)) throw std::invalid_argument("power vector must have K entries");
  for (std::size_t k = 0; k < K; ++k)
    if (!(q[k] > 0.0)) throw InvalidPower("q must be strictly positive for the equalizer");
  // Row k of Delta * G, then MSE_k = (sum_j q_j |(Delta G)_kj|^2 + eta_k^2) / q_k.
  const cmat DG = realization.Delta * scenario.G;
  vec mse(K);
  for (std::size_t k = 0; k < K; ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < K; ++j) acc += q[j] * std::norm(DG(k, j));
    mse[k] = (acc + scenario.eta2[k]) / q[k];
  }
  return mse;
}

namespace {

class Fnv1a {
 public:
  void add(double v) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    add_bits(bits);
  }
  void add(std::complex<double> z) {
    add(z.real());
    add(z.imag());
  }
  void add_bits(std::uint64_t bits) {
    for (int i = 0; i < 8; ++i) {
      h_ ^= (bits >> (8 * i)) & 0xffU;
      h_ *= 0x100000001b3ULL;
    }
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace

std::uint64_t fingerprint(const InterferenceScenario& s) {
  Fnv1a f;
  f.add_bits(s.K);
  f.add_bits(s.M);
  for (std::size_t k = 0; k < s.K; ++k) {
    for (std::size_t j = 0; j < s.K; ++j) {
      for (Eigen::Index m = 0; m < s.h_hat[k][j].size(); ++m) f.add(s.h_hat[k][j][m]);
      f.add(s.sigma2[k][j]);
    }
    f.add(s.eta2[k]);
    f.add(s.alpha[k]);
    f.add(s.eps[k]);
    for (Eigen::Index m = 0; m < s.g[k].size(); ++m) f.add(s.g[k][m]);
  }
  if (s.p_bar)
    for (double v : *s.p_bar) f.add(v);
  if (s.p_bar_tot) f.add(*s.p_bar_tot);
  f.add_bits(s.variance == VarianceConvention::Paper ? 1 : 2);
  return f.value();
}

std::uint64_t fingerprint(const BroadcastScenario& s) {
  Fnv1a f;
  f.add_bits(s.K);
  f.add_bits(s.M);
  for (Eigen::Index i = 0; i < s.H_hat.size(); ++i) f.add(s.H_hat.data()[i]);
  for (const auto& l : s.Lambda)
    for (double v : l) f.add(v);
  for (std::size_t k = 0; k < s.K; ++k) {
    f.add(s.eta2[k]);
    f.add(s.mu[k]);
    f.add(s.phi[k]);
  }
  return f.value();
}

}  // namespace ccpower
