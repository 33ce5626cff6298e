#pragma once

// Small helpers over yaml-cpp that turn schema problems into ConfigError
// with the dotted key path and 1-based line number.

#include <cstdint>
#include <initializer_list>
#include <set>
#include <string>

#include <yaml-cpp/yaml.h>

#include "ccpower/errors.hpp"

namespace ccpower::yamlutil {

inline int line_of(const YAML::Node& node) {
  const auto mark = node.Mark();
  return mark.line >= 0 ? mark.line + 1 : 0;
}

inline std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

/// Rejects keys not in `allowed`.
inline void check_keys(const YAML::Node& map, const std::string& prefix, std::initializer_list<const char*> allowed) {
  if (!map.IsMap()) throw ConfigError(prefix, line_of(map), "expected a mapping");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!ok.count(key)) throw ConfigError(join(prefix, key), line_of(kv.first), "unknown key");
  }
}

template <typename T>
T read(const YAML::Node& map, const std::string& prefix, const std::string& key) {
  const YAML::Node node = map[key];
  const std::string path = join(prefix, key);
  if (!node) throw ConfigError(path, line_of(map), "missing required key");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(path, line_of(node), "value '" + YAML::Dump(node) + "' has the wrong type");
  }
}

template <typename T>
T read_or(const YAML::Node& map, const std::string& prefix, const std::string& key, T fallback) {
  if (!map[key]) return fallback;
  return read<T>(map, prefix, key);
}

inline void require(bool ok, const YAML::Node& map, const std::string& prefix, const std::string& key,
                    const std::string& message) {
  if (ok) return;
  const YAML::Node node = map[key];
  throw ConfigError(join(prefix, key), node ? line_of(node) : line_of(map), message);
}

inline YAML::Node parse(const std::string& text) {
  try {
    return YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("", e.mark.line + 1, e.msg);
  }
}

}  // namespace ccpower::yamlutil
