#pragma once

#include <map>
#include <string>
#include <vector>

#include "hduva/core/nn.hpp"
#include "hduva/model/config.hpp"

namespace hduva::model {

// Self-describing container: magic + version, a JSON header with the model
// config, training snapshot, seed and per-epoch extended-objective history,
// then the raw little-endian weight blob in registration order.
struct Checkpoint {
  int version = 1;
  ModelConfig config;
  std::string variant_tag = "hduva";
  std::uint64_t seed = 0;
  std::vector<double> objective_history;
  std::map<std::string, std::string> train_config;
  nn::ParamStore params;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

std::string model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const std::string& text);

}  // namespace hduva::model
