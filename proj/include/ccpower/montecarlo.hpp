#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ccpower/model.hpp"

namespace ccpower {

inline constexpr double kWilsonZ99 = 2.576;
inline constexpr std::size_t kChunks = 64;
inline constexpr double kPassHalfwidths = 3.0;

struct WilsonInterval {
  double center = 0.0;
  double halfwidth = 0.0;
  double lo() const { return center - halfwidth; }
  double hi() const { return center + halfwidth; }
};

WilsonInterval wilson_interval(std::size_t hits, std::size_t n, double z = kWilsonZ99);

/// Per-user violation frequencies. For the broadcast channel a violation is
/// MSE_k > mu_k and the target is 1 - phi_k.
struct OutageReport {
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> violations;
  std::vector<double> rate;
  std::vector<double> halfwidth;
  std::vector<double> target;
  std::vector<bool> pass;

  bool all_pass() const;
  double satisfaction(std::size_t k) const { return 1.0 - rate.at(k); }
};

/// Frequency of Γ_k <= α_k. `workers` = 0 picks the hardware concurrency;
/// the result does not depend on it.
OutageReport estimate_outage(const InterferenceScenario& scenario, const vec& p, std::size_t n_samples,
                             std::uint64_t seed, std::size_t workers = 0);

OutageReport estimate_mse_satisfaction(const BroadcastScenario& scenario, const vec& q, std::size_t n_samples,
                                       std::uint64_t seed, std::size_t workers = 0);

struct Histogram {
  std::vector<double> edges;  // bins + 1
  std::vector<std::size_t> counts;
};

/// Equal-width bins over the observed MSE range, one histogram per user.
std::vector<Histogram> histogram_mse(const BroadcastScenario& scenario, const vec& q, std::size_t n_samples,
                                     std::size_t bins, std::uint64_t seed);

void write_report_csv(std::ostream& out, const std::string& scenario_id, const OutageReport& report,
                      bool header = true);
void write_histogram_csv(std::ostream& out, const std::vector<Histogram>& histograms);

}  // namespace ccpower
