#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "terraseg/unet.hpp"

namespace terraseg {

// TSCK v1 checkpoint: "TSCK0001" magic, u64le JSON header length, JSON header
// (model config, parameter manifest with shapes and byte offsets, free-form
// "extra" section for pipeline state such as normalization stats), then the
// raw little-endian f32 parameter blob.

inline constexpr char kCheckpointMagic[8] = {'T', 'S', 'C', 'K', '0', '0', '0', '1'};

struct Checkpoint {
  UNetConfig config;
  std::vector<std::pair<std::string, std::vector<float>>> params;  // manifest order
  nlohmann::json extra;  // normalization stats, channel layout, training info
};

Checkpoint snapshot(const UNet<float>& model, nlohmann::json extra);

// Restores a model (and the extra section) from a snapshot.
UNet<float> restore(const Checkpoint& ckpt);

void save_checkpoint(const std::filesystem::path& file, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& file);

nlohmann::json unet_config_to_json(const UNetConfig& cfg);
UNetConfig unet_config_from_json(const nlohmann::json& j);

}  // namespace terraseg
