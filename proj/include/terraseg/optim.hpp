#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "terraseg/tensor.hpp"

namespace terraseg {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-2;
};

// AdamW with decoupled weight decay:
//   t += 1
//   m <- b1*m + (1-b1)*g          v <- b2*v + (1-b2)*g^2
//   mh = m/(1-b1^t)               vh = v/(1-b2^t)
//   theta <- theta - lr*(mh/(sqrt(vh)+eps) + wd*theta)
template <typename T>
class AdamW {
 public:
  AdamW(std::vector<Tensor<T>> params, const AdamWConfig& config)
      : params_(std::move(params)), cfg_(config) {
    if (!(cfg_.beta1 >= 0 && cfg_.beta1 < 1) || !(cfg_.beta2 >= 0 && cfg_.beta2 < 1) ||
        !(cfg_.eps > 0))
      fail(ErrorCode::BadConfig, "adamw: need 0 <= beta < 1 and eps > 0");
    m_.resize(params_.size());
    v_.resize(params_.size());
    for (size_t i = 0; i < params_.size(); ++i) {
      m_[i].assign(static_cast<size_t>(params_[i].numel()), T{0});
      v_[i].assign(static_cast<size_t>(params_[i].numel()), T{0});
    }
  }

  int64_t step_count() const { return t_; }

  void zero_grad() {
    for (auto& p : params_) p.zero_grad();
  }

  void step(double lr) {
    if (!(lr > 0)) fail(ErrorCode::BadConfig, "adamw: lr must be positive");
    ++t_;
    const T b1 = static_cast<T>(cfg_.beta1);
    const T b2 = static_cast<T>(cfg_.beta2);
    const T bc1 = T{1} - static_cast<T>(std::pow(cfg_.beta1, static_cast<double>(t_)));
    const T bc2 = T{1} - static_cast<T>(std::pow(cfg_.beta2, static_cast<double>(t_)));
    const T eps = static_cast<T>(cfg_.eps);
    const T wd = static_cast<T>(cfg_.weight_decay);
    const T lrt = static_cast<T>(lr);
    for (size_t i = 0; i < params_.size(); ++i) {
      auto vals = params_[i].values();
      auto grads = params_[i].grads();
      T* m = m_[i].data();
      T* v = v_[i].data();
      for (size_t j = 0; j < vals.size(); ++j) {
        const T g = grads[j];
        m[j] = b1 * m[j] + (T{1} - b1) * g;
        v[j] = b2 * v[j] + (T{1} - b2) * g * g;
        const T mh = m[j] / bc1;
        const T vh = v[j] / bc2;
        vals[j] -= lrt * (mh / (std::sqrt(vh) + eps) + wd * vals[j]);
      }
    }
  }

 private:
  std::vector<Tensor<T>> params_;
  AdamWConfig cfg_;
  std::vector<std::vector<T>> m_, v_;
  int64_t t_ = 0;
};

// One full cosine arc from lr_max (step 0) to lr_min (step == total_steps).
inline double cosine_lr(int64_t step, int64_t total_steps, double lr_max, double lr_min) {
  if (total_steps < 1) fail(ErrorCode::BadConfig, "cosine_lr: total_steps must be >= 1");
  if (step < 0 || step > total_steps)
    fail(ErrorCode::BadConfig, "cosine_lr: step outside [0, total_steps]");
  const double phase = std::numbers::pi * static_cast<double>(step) / static_cast<double>(total_steps);
  return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(phase));
}

}  // namespace terraseg
