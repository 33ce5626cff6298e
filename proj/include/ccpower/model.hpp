#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ccpower/rng.hpp"

namespace ccpower {

using cvec = Eigen::VectorXcd;
using cmat = Eigen::MatrixXcd;
using vec = Eigen::VectorXd;

/// How the Bernstein constraints model the variance of delta^H g.
///   Paper: sigma^2 |1^T g|^2, the factor the constraint derivation prints.
///   Norm:  sigma^2 ||g||^2, the exact variance under i.i.d. per-antenna errors.
enum class VarianceConvention { Paper, Norm };

std::string to_string(VarianceConvention v);
VarianceConvention parse_variance_convention(const std::string& s);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

struct Geometry {
  std::vector<Point2> tx;
  std::vector<Point2> rx;

  // Transmitters on a line with `spacing` between neighbours, each receiver
  // `link_distance` away from its own transmitter on a parallel line.
  static Geometry linear(std::size_t K, double link_distance = 200.0, double spacing = 400.0);

  double distance(std::size_t k, std::size_t j) const;  // receiver k to transmitter j
};

struct PowerCaps {
  std::optional<double> individual;  // same cap for every link
  std::optional<double> total;
  bool operator==(const PowerCaps&) const = default;
};

/// Recipe for a random interference-channel instance. This is what gets
/// serialized; the instance itself is regenerated from it.
struct InterferenceParams {
  std::size_t K = 3;
  std::size_t M = 3;
  double kappa = 0.10;
  double eps = 0.05;
  double alpha = 1.0;
  double noise_power = 1e-2;
  std::uint64_t seed = 1;
  std::string layout = "linear";
  std::optional<std::vector<Point2>> tx_coordinates;
  std::optional<std::vector<Point2>> rx_coordinates;
  PowerCaps caps;
  VarianceConvention variance = VarianceConvention::Paper;

  bool operator==(const InterferenceParams&) const = default;
  Geometry geometry() const;
};

struct InterferenceScenario {
  std::size_t K = 0;
  std::size_t M = 0;
  std::vector<std::vector<cvec>> h_hat;        // [k][j]: estimate of channel from tx j to rx k
  std::vector<std::vector<double>> sigma2;     // [k][j]: per-component error variance
  std::vector<std::vector<double>> est_var;    // [k][j]: per-component variance of the estimate (generator only)
  std::vector<double> eta2;
  std::vector<cvec> g;                         // unit-norm beam directions
  std::vector<double> alpha;
  std::vector<double> eps;
  std::optional<std::vector<double>> p_bar;
  std::optional<double> p_bar_tot;
  VarianceConvention variance = VarianceConvention::Paper;

  void validate() const;

  double cross_gain(std::size_t k, std::size_t j) const;  // |h_hat_kj^H g_j|^2
  double spread(std::size_t j) const;                     // |1^T g_j|^2 or ||g_j||^2
};

struct BroadcastParams {
  std::size_t K = 3;
  std::size_t M = 3;
  double sigma2 = 1.5e-3;
  double mu_dB = -14.0;
  double phi = 0.99;
  double noise_power = 1e-2;
  std::uint64_t seed = 1;
  bool operator==(const BroadcastParams&) const = default;
};

struct BroadcastScenario {
  std::size_t K = 0;
  std::size_t M = 0;
  cmat H_hat;                 // K x M, full row rank
  std::vector<vec> Lambda;    // [k]: diagonal of the row-k error covariance
  vec eta2;
  vec mu;
  vec phi;
  cmat G;                     // M x K pseudoinverse of H_hat

  void validate() const;
};

struct InterferenceRealization {
  std::vector<std::vector<cvec>> h;  // [k][j]
  std::uint64_t seed = 0;
};

struct BroadcastRealization {
  cmat Delta;  // K x M
  std::uint64_t seed = 0;
};

double draw_shadowing_db(Engine& engine, double std_db = 8.0);

/// Large-scale amplitude factor (200/d)^3.5 relative to the 200 m reference.
inline double path_loss_amplitude(double d) { return std::pow(200.0 / d, 3.5); }

InterferenceScenario generate_interference_scenario(const InterferenceParams& params);

void make_channel_matched_beamformers(InterferenceScenario& scenario);

BroadcastScenario make_broadcast_scenario(cmat H_hat, std::vector<vec> Lambda, vec eta2, vec mu, vec phi);

BroadcastScenario generate_broadcast_scenario(const BroadcastParams& params);

InterferenceRealization realize_channels(const InterferenceScenario& scenario, std::uint64_t seed);

/// Draws into `out` from an existing stream; reuses the storage in `out`.
void realize_channels(const InterferenceScenario& scenario, Engine& engine, InterferenceRealization& out);

BroadcastRealization realize_channels(const BroadcastScenario& scenario, std::uint64_t seed);
void realize_channels(const BroadcastScenario& scenario, Engine& engine, BroadcastRealization& out);

vec compute_sinr(const InterferenceRealization& realization, const InterferenceScenario& scenario, const vec& p);

vec compute_mse(const BroadcastRealization& realization, const BroadcastScenario& scenario, const vec& q);

/// FNV-1a over every numeric field; used to detect stale solution files.
std::uint64_t fingerprint(const InterferenceScenario& scenario);
std::uint64_t fingerprint(const BroadcastScenario& scenario);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

}  // namespace ccpower
