#pragma once

#include <string>

#include "json.hpp"
#include "oceannet/dataset.hpp"
#include "oceannet/train.hpp"

namespace oceannet {

/// JSON views of the configuration structs. Parsing is strict: unknown keys
/// and wrongly typed values throw ConfigError; absent keys keep defaults.
nlohmann::json to_json(const GenConfig& cfg);
GenConfig gen_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TrainConfig& cfg);
/// Grid size is taken from the dataset, not the file. An absent loss cutoff
/// defaults to W/4 once the grid is known (see resolve_grid).
TrainConfig train_config_from_json(const nlohmann::json& j);
void resolve_grid(TrainConfig& cfg, std::size_t height, std::size_t width, bool cutoff_given);

/// Reads and parses a JSON file; ConfigError on failure.
nlohmann::json load_json(const std::string& path);

}  // namespace oceannet
