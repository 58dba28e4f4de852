#include "terraseg/unet.hpp"

#include <cstring>
#include <fstream>

#include "terraseg/checkpoint.hpp"

namespace terraseg {

using nlohmann::json;

void UNetConfig::validate() const {
  if (in_channels < 1) fail(ErrorCode::BadConfig, "unet config: in_channels must be >= 1");
  if (depth < 1 || depth > 8) fail(ErrorCode::BadConfig, "unet config: depth must be in 1..8");
  if (encoder_widths.size() != static_cast<size_t>(depth) + 1)
    fail(ErrorCode::BadConfig, "unet config: need depth+1 encoder widths");
  if (decoder_widths.size() != static_cast<size_t>(depth))
    fail(ErrorCode::BadConfig, "unet config: need depth decoder widths");
  for (int64_t w : encoder_widths)
    if (w < 1) fail(ErrorCode::BadConfig, "unet config: encoder widths must be >= 1");
  for (int64_t w : decoder_widths)
    if (w < 1) fail(ErrorCode::BadConfig, "unet config: decoder widths must be >= 1");
}

int64_t UNetConfig::param_count() const {
  validate();
  auto conv = [](int64_t cout, int64_t cin, int64_t k) { return cout * cin * k * k + cout; };
  int64_t n = 0;
  int64_t prev = in_channels;
  for (int level = 0; level <= depth; ++level) {
    const int64_t w = encoder_widths[static_cast<size_t>(level)];
    n += conv(w, prev, 3) + conv(w, w, 3);
    prev = w;
  }
  for (int d = 0; d < depth; ++d) {
    const int64_t skip = encoder_widths[static_cast<size_t>(depth - 1 - d)];
    const int64_t w = decoder_widths[static_cast<size_t>(d)];
    n += conv(w, prev + skip, 3) + conv(w, w, 3);
    prev = w;
  }
  return n + conv(1, prev, 1);
}

json unet_config_to_json(const UNetConfig& cfg) {
  return json{{"in_channels", cfg.in_channels},
              {"depth", cfg.depth},
              {"encoder_widths", cfg.encoder_widths},
              {"decoder_widths", cfg.decoder_widths}};
}

UNetConfig unet_config_from_json(const json& j) {
  UNetConfig cfg;
  try {
    cfg.in_channels = j.at("in_channels").get<int64_t>();
    cfg.depth = j.at("depth").get<int>();
    cfg.encoder_widths = j.at("encoder_widths").get<std::vector<int64_t>>();
    cfg.decoder_widths = j.at("decoder_widths").get<std::vector<int64_t>>();
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("unet config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

Checkpoint snapshot(const UNet<float>& model, json extra) {
  Checkpoint ckpt;
  ckpt.config = model.config();
  ckpt.extra = std::move(extra);
  for (const auto& p : model.params()) {
    auto vals = p.tensor.values();
    ckpt.params.emplace_back(p.name, std::vector<float>(vals.begin(), vals.end()));
  }
  return ckpt;
}

UNet<float> restore(const Checkpoint& ckpt) {
  UNet<float> model(ckpt.config, 0);
  auto& params = model.params();
  if (params.size() != ckpt.params.size())
    fail(ErrorCode::Parse, "checkpoint: parameter count does not match its config");
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& [name, data] = ckpt.params[i];
    if (name != params[i].name || data.size() != static_cast<size_t>(params[i].tensor.numel()))
      fail(ErrorCode::Parse, "checkpoint: parameter '" + name + "' does not match its config");
    std::copy(data.begin(), data.end(), params[i].tensor.values().begin());
  }
  return model;
}

void save_checkpoint(const std::filesystem::path& file, const Checkpoint& ckpt) {
  json manifest = json::array();
  uint64_t offset = 0;
  for (const auto& [name, data] : ckpt.params) {
    manifest.push_back(
        {{"name", name}, {"count", data.size()}, {"byte_offset", offset}});
    offset += data.size() * sizeof(float);
  }
  json header{{"config", unet_config_to_json(ckpt.config)},
              {"params", manifest},
              {"extra", ckpt.extra}};
  const std::string header_text = header.dump();

  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoWrite, "cannot create " + file.string());
  out.write(kCheckpointMagic, sizeof kCheckpointMagic);
  const uint64_t header_len = header_text.size();
  out.write(reinterpret_cast<const char*>(&header_len), 8);
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  for (const auto& [name, data] : ckpt.params)
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(float)));
  if (!out) fail(ErrorCode::IoWrite, "short write to " + file.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail(ErrorCode::IoRead, "cannot open checkpoint " + file.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    fail(ErrorCode::Parse, file.string() + ": bad checkpoint magic");
  uint64_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), 8);
  if (!in || header_len == 0 || header_len > (64u << 20))
    fail(ErrorCode::Parse, file.string() + ": bad checkpoint header length");
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(header_len));
  if (!in) fail(ErrorCode::Parse, file.string() + ": truncated checkpoint header");

  Checkpoint ckpt;
  try {
    json header = json::parse(header_text);
    ckpt.config = unet_config_from_json(header.at("config"));
    ckpt.extra = header.value("extra", json::object());
    for (const auto& entry : header.at("params")) {
      const std::string name = entry.at("name").get<std::string>();
      const size_t count = entry.at("count").get<size_t>();
      std::vector<float> data(count);
      in.read(reinterpret_cast<char*>(data.data()),
              static_cast<std::streamsize>(count * sizeof(float)));
      if (!in) fail(ErrorCode::Parse, file.string() + ": truncated parameter blob");
      ckpt.params.emplace_back(name, std::move(data));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, file.string() + ": " + e.what());
  }
  return ckpt;
}

}  // namespace terraseg
