#include "ccpower/scenario_io.hpp"

#include <limits>

#include <yaml-cpp/yaml.h>

#include "yaml_util.hpp"

namespace ccpower {

using namespace yamlutil;

namespace {

std::vector<Point2> read_points(const YAML::Node& map, const std::string& prefix, const std::string& key) {
  const YAML::Node list = map[key];
  const std::string path = join(prefix, key);
  if (!list || !list.IsSequence()) throw ConfigError(path, line_of(list ? list : map), "expected a list of [x, y]");
  std::vector<Point2> pts;
  for (const auto& item : list) {
    if (!item.IsSequence() || item.size() != 2) throw ConfigError(path, line_of(item), "each point must be [x, y]");
    try {
      pts.push_back({item[0].as<double>(), item[1].as<double>()});
    } catch (const YAML::Exception&) {
      throw ConfigError(path, line_of(item), "coordinates must be numbers");
    }
  }
  return pts;
}

void emit_points(YAML::Emitter& out, const std::vector<Point2>& pts) {
  out << YAML::BeginSeq;
  for (const auto& p : pts) out << YAML::Flow << YAML::BeginSeq << p.x << p.y << YAML::EndSeq;
  out << YAML::EndSeq;
}

}  // namespace

namespace detail {

InterferenceParams interference_params_from_node(const YAML::Node& node, const std::string& prefix) {
  check_keys(node, prefix,
             {"K", "M", "kappa", "eps", "alpha", "noise_power", "seed", "geometry", "caps", "variance_convention"});
  InterferenceParams p;
  p.K = read<std::size_t>(node, prefix, "K");
  p.M = read<std::size_t>(node, prefix, "M");
  p.kappa = read<double>(node, prefix, "kappa");
  p.eps = read<double>(node, prefix, "eps");
  p.alpha = read<double>(node, prefix, "alpha");
  p.seed = read<std::uint64_t>(node, prefix, "seed");
  p.noise_power = read_or<double>(node, prefix, "noise_power", p.noise_power);
  require(p.K >= 1, node, prefix, "K", "must be at least 1");
  require(p.M >= 1, node, prefix, "M", "must be at least 1");
  require(p.kappa > 0.0 && p.kappa < 1.0, node, prefix, "kappa", "must lie in (0,1)");
  require(p.eps > 0.0 && p.eps < 1.0, node, prefix, "eps", "must lie in (0,1)");
  require(p.alpha > 0.0, node, prefix, "alpha", "must be positive");
  require(p.noise_power > 0.0, node, prefix, "noise_power", "must be positive");

  if (const YAML::Node vc = node["variance_convention"]) {
    try {
      p.variance = parse_variance_convention(vc.as<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError(join(prefix, "variance_convention"), line_of(vc), e.what());
    }
  }

  if (const YAML::Node geo = node["geometry"]) {
    const std::string gp = join(prefix, "geometry");
    check_keys(geo, gp, {"layout", "coordinates"});
    if (geo["layout"]) {
      p.layout = read<std::string>(geo, gp, "layout");
      require(p.layout == "linear", geo, gp, "layout", "only the 'linear' layout is built in");
    }
    if (const YAML::Node coords = geo["coordinates"]) {
      const std::string cp = join(gp, "coordinates");
      check_keys(coords, cp, {"tx", "rx"});
      p.tx_coordinates = read_points(coords, cp, "tx");
      p.rx_coordinates = read_points(coords, cp, "rx");
      require(p.tx_coordinates->size() == p.K && p.rx_coordinates->size() == p.K, coords, cp, "tx",
              "tx and rx need K points each");
    }
  }

  if (const YAML::Node caps = node["caps"]) {
    const std::string cp = join(prefix, "caps");
    check_keys(caps, cp, {"individual", "total"});
    if (caps["individual"]) {
      p.caps.individual = read<double>(caps, cp, "individual");
      require(*p.caps.individual > 0.0, caps, cp, "individual", "must be positive");
    }
    if (caps["total"]) {
      p.caps.total = read<double>(caps, cp, "total");
      require(*p.caps.total > 0.0, caps, cp, "total", "must be positive");
    }
  }
  return p;
}

BroadcastParams broadcast_params_from_node(const YAML::Node& node, const std::string& prefix) {
  check_keys(node, prefix, {"K", "M", "sigma2", "mu_dB", "phi", "noise_power", "seed"});
  BroadcastParams p;
  p.K = read<std::size_t>(node, prefix, "K");
  p.M = read<std::size_t>(node, prefix, "M");
  p.sigma2 = read<double>(node, prefix, "sigma2");
  p.mu_dB = read<double>(node, prefix, "mu_dB");
  p.phi = read<double>(node, prefix, "phi");
  p.seed = read<std::uint64_t>(node, prefix, "seed");
  p.noise_power = read_or<double>(node, prefix, "noise_power", p.noise_power);
  require(p.K >= 1 && p.K <= p.M, node, prefix, "K", "need 1 <= K <= M for a full-row-rank channel");
  require(p.sigma2 >= 0.0, node, prefix, "sigma2", "must be nonnegative");
  require(p.phi > 0.0 && p.phi < 1.0, node, prefix, "phi", "must lie in (0,1)");
  require(p.noise_power > 0.0, node, prefix, "noise_power", "must be positive");
  return p;
}

void emit(YAML::Emitter& out, const InterferenceParams& p) {
  out << YAML::BeginMap;
  out << YAML::Key << "K" << YAML::Value << p.K;
  out << YAML::Key << "M" << YAML::Value << p.M;
  out << YAML::Key << "kappa" << YAML::Value << p.kappa;
  out << YAML::Key << "eps" << YAML::Value << p.eps;
  out << YAML::Key << "alpha" << YAML::Value << p.alpha;
  out << YAML::Key << "noise_power" << YAML::Value << p.noise_power;
  out << YAML::Key << "seed" << YAML::Value << p.seed;
  out << YAML::Key << "variance_convention" << YAML::Value << to_string(p.variance);
  out << YAML::Key << "geometry" << YAML::Value << YAML::BeginMap;
  if (p.tx_coordinates && p.rx_coordinates) {
    out << YAML::Key << "coordinates" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "tx" << YAML::Value;
    emit_points(out, *p.tx_coordinates);
    out << YAML::Key << "rx" << YAML::Value;
    emit_points(out, *p.rx_coordinates);
    out << YAML::EndMap;
  } else {
    out << YAML::Key << "layout" << YAML::Value << p.layout;
  }
  out << YAML::EndMap;
  if (p.caps.individual || p.caps.total) {
    out << YAML::Key << "caps" << YAML::Value << YAML::BeginMap;
    if (p.caps.individual) out << YAML::Key << "individual" << YAML::Value << *p.caps.individual;
    if (p.caps.total) out << YAML::Key << "total" << YAML::Value << *p.caps.total;
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
}

void emit(YAML::Emitter& out, const BroadcastParams& p) {
  out << YAML::BeginMap;
  out << YAML::Key << "K" << YAML::Value << p.K;
  out << YAML::Key << "M" << YAML::Value << p.M;
  out << YAML::Key << "sigma2" << YAML::Value << p.sigma2;
  out << YAML::Key << "mu_dB" << YAML::Value << p.mu_dB;
  out << YAML::Key << "phi" << YAML::Value << p.phi;
  out << YAML::Key << "noise_power" << YAML::Value << p.noise_power;
  out << YAML::Key << "seed" << YAML::Value << p.seed;
  out << YAML::EndMap;
}

}  // namespace detail

std::string to_yaml(const InterferenceParams& params) {
  YAML::Emitter out;
  out.SetDoublePrecision(std::numeric_limits<double>::max_digits10);
  detail::emit(out, params);
  return std::string(out.c_str()) + "\n";
}

std::string to_yaml(const BroadcastParams& params) {
  YAML::Emitter out;
  out.SetDoublePrecision(std::numeric_limits<double>::max_digits10);
  detail::emit(out, params);
  return std::string(out.c_str()) + "\n";
}

InterferenceParams parse_interference_params(const std::string& text) {
  return detail::interference_params_from_node(parse(text), "");
}

BroadcastParams parse_broadcast_params(const std::string& text) {
  return detail::broadcast_params_from_node(parse(text), "");
}

}  // namespace ccpower
