#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "terraseg/ops.hpp"
#include "terraseg/rng.hpp"
#include "terraseg/tensor.hpp"

namespace terraseg {

// Compact U-Net: plain double-conv encoder pyramid, nearest upsampling with
// skip concatenation on the way up, 1x1 segmentation head emitting logits.
struct UNetConfig {
  int64_t in_channels = 1;
  int depth = 3;
  std::vector<int64_t> encoder_widths = {16, 32, 64, 128};  // depth + 1 entries
  std::vector<int64_t> decoder_widths = {64, 32, 16};       // depth entries

  static UNetConfig desk(int64_t in_channels) {
    return UNetConfig{in_channels, 3, {16, 32, 64, 128}, {64, 32, 16}};
  }
  // Large preset; decoder widths follow the conventional halving ladder.
  static UNetConfig paper_scale(int64_t in_channels) {
    return UNetConfig{in_channels, 5, {32, 64, 128, 256, 512, 512}, {256, 128, 64, 32, 16}};
  }

  void validate() const;
  int64_t param_count() const;

  bool operator==(const UNetConfig&) const = default;
};

// One named parameter tensor of the model, in checkpoint order.
template <typename T>
struct NamedParam {
  std::string name;
  Tensor<T> tensor;
};

template <typename T>
class UNet {
 public:
  UNet(const UNetConfig& config, uint64_t seed) : cfg_(config) {
    cfg_.validate();
    build(seed);
  }

  const UNetConfig& config() const { return cfg_; }

  std::vector<NamedParam<T>>& params() { return params_; }
  const std::vector<NamedParam<T>>& params() const { return params_; }

  int64_t param_count() const {
    int64_t n = 0;
    for (const auto& p : params_) n += p.tensor.numel();
    return n;
  }

  // x: [B, in_channels, H, W], H and W divisible by 2^depth. Returns logits
  // [B, 1, H, W].
  Tensor<T> forward(const Tensor<T>& x) const {
    const Shape& s = x.shape();
    if (s.rank != 4 || s[1] != cfg_.in_channels)
      fail(ErrorCode::ShapeMismatch, "unet: expected [B," + std::to_string(cfg_.in_channels) +
                                         ",H,W], got " + s.str());
    const int64_t div = int64_t{1} << cfg_.depth;
    if (s[2] % div != 0 || s[3] % div != 0)
      fail(ErrorCode::IndivisibleSpatialDims,
           "unet: spatial dims " + s.str() + " must be divisible by " + std::to_string(div));

    std::vector<Tensor<T>> skips;
    Tensor<T> t = x;
    size_t layer = 0;
    for (int level = 0; level <= cfg_.depth; ++level) {
      t = relu(conv2d(t, params_[layer].tensor, params_[layer + 1].tensor));
      t = relu(conv2d(t, params_[layer + 2].tensor, params_[layer + 3].tensor));
      layer += 4;
      if (level < cfg_.depth) {
        skips.push_back(t);
        t = maxpool2(t);
      }
    }
    for (int d = 0; d < cfg_.depth; ++d) {
      t = concat(upsample2(t), skips[static_cast<size_t>(cfg_.depth - 1 - d)]);
      t = relu(conv2d(t, params_[layer].tensor, params_[layer + 1].tensor));
      t = relu(conv2d(t, params_[layer + 2].tensor, params_[layer + 3].tensor));
      layer += 4;
    }
    return conv2d(t, params_[layer].tensor, params_[layer + 1].tensor);  // 1x1 head
  }

 private:
  void add_conv(const std::string& name, int64_t cout, int64_t cin, int64_t k, Rng& rng) {
    std::vector<T> w(static_cast<size_t>(cout * cin * k * k));
    // Kaiming fan-in scaling for ReLU stacks
    const double stddev = std::sqrt(2.0 / static_cast<double>(cin * k * k));
    for (T& v : w) v = static_cast<T>(rng.normal(0.0, stddev));
    params_.push_back({name + ".w", Tensor<T>::param(Shape{cout, cin, k, k}, std::move(w))});
    params_.push_back(
        {name + ".b", Tensor<T>::param(Shape{cout}, std::vector<T>(static_cast<size_t>(cout)))});
  }

  void build(uint64_t seed) {
    uint64_t layer_tag = 0;
    auto layer_rng = [&] { return Rng::from_tags(seed, {0x756e6574, layer_tag++}); };
    int64_t prev = cfg_.in_channels;
    for (int level = 0; level <= cfg_.depth; ++level) {
      const int64_t width = cfg_.encoder_widths[static_cast<size_t>(level)];
      Rng r1 = layer_rng();
      add_conv("enc" + std::to_string(level) + ".conv1", width, prev, 3, r1);
      Rng r2 = layer_rng();
      add_conv("enc" + std::to_string(level) + ".conv2", width, width, 3, r2);
      prev = width;
    }
    for (int d = 0; d < cfg_.depth; ++d) {
      const int64_t skip = cfg_.encoder_widths[static_cast<size_t>(cfg_.depth - 1 - d)];
      const int64_t width = cfg_.decoder_widths[static_cast<size_t>(d)];
      Rng r1 = layer_rng();
      add_conv("dec" + std::to_string(d) + ".conv1", width, prev + skip, 3, r1);
      Rng r2 = layer_rng();
      add_conv("dec" + std::to_string(d) + ".conv2", width, width, 3, r2);
      prev = width;
    }
    Rng rh = layer_rng();
    add_conv("head", 1, prev, 1, rh);
  }

  UNetConfig cfg_;
  std::vector<NamedParam<T>> params_;
};

}  // namespace terraseg
