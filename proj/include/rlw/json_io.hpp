#pragma once

// JSON encodings shared by checkpoints, manifests and metrics.

#include <json.hpp>
#include <string>

#include "rlw/train.hpp"

namespace rlw {

using Json = nlohmann::ordered_json;

/// C99 hexadecimal float ("%a"); exact for every finite double.
std::string hex_double(double v);
/// Accepts a hex string or a plain JSON number.
double parse_double(const Json& j, const std::string& what);

Json to_json(const ScenarioConfig& s);
ScenarioConfig scenario_from_json(const Json& j);
Json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const Json& j);
Json to_json(const ConservedTriple& t);

}  // namespace rlw
