#pragma once

#include <string>

#include <json.hpp>

#include "islanding/grid.hpp"

namespace islanding {

// Native JSON network format; see docs/network.schema.json.
nlohmann::json network_to_json(const PowerNetwork& network);
PowerNetwork parse_network_json(const std::string& text);
PowerNetwork parse_network_json(const nlohmann::json& j);

nlohmann::json coherency_to_json(const CoherencyConfig& coherency);
CoherencyConfig coherency_from_json(const nlohmann::json& j);

}  // namespace islanding
