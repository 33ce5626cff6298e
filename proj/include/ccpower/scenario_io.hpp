#pragma once

#include <string>

#include "ccpower/model.hpp"

namespace YAML {
class Node;
class Emitter;
}  // namespace YAML

namespace ccpower {

/// Scenario recipes as YAML. Doubles are written with 17 significant digits,
/// so text -> params -> text is lossless.
std::string to_yaml(const InterferenceParams& params);
std::string to_yaml(const BroadcastParams& params);

InterferenceParams parse_interference_params(const std::string& text);
BroadcastParams parse_broadcast_params(const std::string& text);

namespace detail {
InterferenceParams interference_params_from_node(const YAML::Node& node, const std::string& prefix);
BroadcastParams broadcast_params_from_node(const YAML::Node& node, const std::string& prefix);
void emit(YAML::Emitter& out, const InterferenceParams& params);
void emit(YAML::Emitter& out, const BroadcastParams& params);
}  // namespace detail

}  // namespace ccpower
