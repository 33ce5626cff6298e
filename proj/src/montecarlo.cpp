#include "ccpower/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "ccpower/errors.hpp"

namespace ccpower {

WilsonInterval wilson_interval(std::size_t hits, std::size_t n, double z) {
  if (n == 0) throw std::invalid_argument("Wilson interval needs at least one sample");
  if (hits > n) throw std::invalid_argument("more hits than samples");
  const double nn = static_cast<double>(n);
  const double r = static_cast<double>(hits) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  WilsonInterval w;
  w.center = (r + z2 / (2.0 * nn)) / denom;
  w.halfwidth = z / denom * std::sqrt(r * (1.0 - r) / nn + z2 / (4.0 * nn * nn));
  return w;
}

bool OutageReport::all_pass() const { return std::all_of(pass.begin(), pass.end(), [](bool b) { return b; }); }

namespace {

std::size_t chunk_size(std::size_t n, std::size_t c) { return n / kChunks + (c < n % kChunks ? 1 : 0); }

// Runs body(chunk, engine, samples) for every chunk on a small thread pool.
// Each chunk owns the substream keyed by (seed, chunk), so scheduling cannot
// change the draws.
template <class Body>
void for_each_chunk(std::size_t n, std::uint64_t seed, Stream stream, std::size_t workers, Body body) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, kChunks);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t c = next++; c < kChunks; c = next++) {
      Engine engine(derive_seed(seed, stream, c));
      body(c, engine, chunk_size(n, c));
    }
  };
  if (workers == 1) {
    run();
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
}

OutageReport make_report(std::size_t n, std::uint64_t seed, const std::vector<std::size_t>& violations,
                         std::vector<double> target) {
  OutageReport r;
  r.n_samples = n;
  r.seed = seed;
  r.violations = violations;
  r.target = std::move(target);
  for (std::size_t k = 0; k < violations.size(); ++k) {
    const double rate = static_cast<double>(violations[k]) / static_cast<double>(n);
    const double hw = wilson_interval(violations[k], n).halfwidth;
    r.rate.push_back(rate);
    r.halfwidth.push_back(hw);
    r.pass.push_back(rate <= r.target[k] + kPassHalfwidths * hw);
  }
  return r;
}

void check_samples(std::size_t n) {
  if (n < 1000) throw std::invalid_argument("Monte Carlo validation needs at least 1000 samples");
}

}  // namespace

OutageReport estimate_outage(const InterferenceScenario& s, const vec& p, std::size_t n, std::uint64_t seed,
                             std::size_t workers) {
  check_samples(n);
  s.validate();
  if (p.size() != static_cast<Eigen::Index>(s.K) || (p.array() < 0.0).any())
    throw InvalidPower("power vector must be nonnegative with K entries");
  std::vector<std::vector<std::size_t>> per_chunk(kChunks, std::vector<std::size_t>(s.K, 0));
  for_each_chunk(n, seed, Stream::Validation, workers, [&](std::size_t c, Engine& engine, std::size_t m) {
    InterferenceRealization real;
    auto& counts = per_chunk[c];
    for (std::size_t i = 0; i < m; ++i) {
      realize_channels(s, engine, real);
      const vec sinr = compute_sinr(real, s, p);
      for (std::size_t k = 0; k < s.K; ++k)
        if (sinr[static_cast<Eigen::Index>(k)] <= s.alpha[k]) ++counts[k];
    }
  });
  std::vector<std::size_t> total(s.K, 0);
  for (const auto& counts : per_chunk)
    for (std::size_t k = 0; k < s.K; ++k) total[k] += counts[k];
  return make_report(n, seed, total, s.eps);
}

OutageReport estimate_mse_satisfaction(const BroadcastScenario& s, const vec& q, std::size_t n, std::uint64_t seed,
                                       std::size_t workers) {
  check_samples(n);
  s.validate();
  std::vector<std::vector<std::size_t>> per_chunk(kChunks, std::vector<std::size_t>(s.K, 0));
  for_each_chunk(n, seed, Stream::Validation, workers, [&](std::size_t c, Engine& engine, std::size_t m) {
    BroadcastRealization real;
    auto& counts = per_chunk[c];
    for (std::size_t i = 0; i < m; ++i) {
      realize_channels(s, engine, real);
      const vec mse = compute_mse(real, s, q);
      for (std::size_t k = 0; k < s.K; ++k)
        if (mse[static_cast<Eigen::Index>(k)] > s.mu[static_cast<Eigen::Index>(k)]) ++counts[k];
    }
  });
  std::vector<std::size_t> total(s.K, 0);
  for (const auto& counts : per_chunk)
    for (std::size_t k = 0; k < s.K; ++k) total[k] += counts[k];
  std::vector<double> target;
  for (std::size_t k = 0; k < s.K; ++k) target.push_back(1.0 - s.phi[static_cast<Eigen::Index>(k)]);
  return make_report(n, seed, total, std::move(target));
}

std::vector<Histogram> histogram_mse(const BroadcastScenario& s, const vec& q, std::size_t n, std::size_t bins,
                                     std::uint64_t seed) {
  if (bins < 2) throw std::invalid_argument("histogram needs at least two bins");
  if (n == 0) throw std::invalid_argument("histogram needs samples");
  s.validate();
  std::vector<std::vector<double>> values(s.K);
  std::vector<std::vector<std::vector<double>>> per_chunk(kChunks, std::vector<std::vector<double>>(s.K));
  for_each_chunk(n, seed, Stream::Histogram, 1, [&](std::size_t c, Engine& engine, std::size_t m) {
    BroadcastRealization real;
    for (std::size_t i = 0; i < m; ++i) {
      realize_channels(s, engine, real);
      const vec mse = compute_mse(real, s, q);
      for (std::size_t k = 0; k < s.K; ++k) per_chunk[c][k].push_back(mse[static_cast<Eigen::Index>(k)]);
    }
  });
  for (const auto& chunk : per_chunk)
    for (std::size_t k = 0; k < s.K; ++k) values[k].insert(values[k].end(), chunk[k].begin(), chunk[k].end());

  std::vector<Histogram> out(s.K);
  for (std::size_t k = 0; k < s.K; ++k) {
    const auto [mn, mx] = std::minmax_element(values[k].begin(), values[k].end());
    double lo = *mn;
    double width = (*mx - *mn) / static_cast<double>(bins);
    if (!(width > 0.0)) {
      // Degenerate range: centre a narrow grid on the single value.
      width = 1e-9 * std::max(1.0, std::abs(lo));
      lo -= width * static_cast<double>(bins / 2) + 0.5 * width;
    }
    Histogram& h = out[k];
    for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(lo + width * static_cast<double>(b));
    h.counts.assign(bins, 0);
    for (double v : values[k]) {
      auto b = static_cast<std::size_t>(std::floor((v - lo) / width));
      ++h.counts[std::min(b, bins - 1)];
    }
  }
  return out;
}

void write_report_csv(std::ostream& out, const std::string& scenario_id, const OutageReport& r, bool header) {
  if (header) out << "scenario_id,user,rate,halfwidth,target,pass\n";
  for (std::size_t k = 0; k < r.rate.size(); ++k)
    out << scenario_id << ',' << k << ',' << r.rate[k] << ',' << r.halfwidth[k] << ',' << r.target[k] << ','
        << (r.pass[k] ? "true" : "false") << '\n';
}

void write_histogram_csv(std::ostream& out, const std::vector<Histogram>& histograms) {
  out << "user,bin_lo,bin_hi,count\n";
  for (std::size_t k = 0; k < histograms.size(); ++k) {
    const Histogram& h = histograms[k];
    for (std::size_t b = 0; b < h.counts.size(); ++b)
      out << k << ',' << h.edges[b] << ',' << h.edges[b + 1] << ',' << h.counts[b] << '\n';
  }
}

}  // namespace ccpower
