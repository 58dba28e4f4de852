#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "terraseg/parallel.hpp"
#include "terraseg/tensor.hpp"

namespace terraseg {

// Free-function tensor ops. Forward math runs through Eigen; backward closures
// implement the exact adjoints. Batch-parallel sections write disjoint slices
// and reduce shared gradients in batch order, so results are independent of
// the worker count.

template <typename T>
using MatrixRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapRM = Eigen::Map<MatrixRM<T>>;
template <typename T>
using ConstMapRM = Eigen::Map<const MatrixRM<T>>;
template <typename T>
using ArrayMap = Eigen::Map<Eigen::Array<T, Eigen::Dynamic, 1>>;
template <typename T>
using ConstArrayMap = Eigen::Map<const Eigen::Array<T, Eigen::Dynamic, 1>>;

namespace detail {

inline void require(bool ok, ErrorCode code, const std::string& message) {
  if (!ok) fail(code, message);
}

// Scatters x[b] (Cin x H x W, zero padded) into column matrix
// col[(ci*k+di)*k+dj][oh*W+ow] = x[ci][oh+di-pad][ow+dj-pad].
template <typename T>
void im2col(const T* x, int64_t cin, int64_t h, int64_t w, int64_t k, T* col) {
  const int64_t pad = k / 2;
  const int64_t hw = h * w;
  for (int64_t ci = 0; ci < cin; ++ci) {
    const T* plane = x + ci * hw;
    for (int64_t di = 0; di < k; ++di) {
      for (int64_t dj = 0; dj < k; ++dj) {
        T* row = col + ((ci * k + di) * k + dj) * hw;
        const int64_t shift = dj - pad;
        const int64_t src_lo = std::max<int64_t>(0, -shift);
        const int64_t src_hi = std::min<int64_t>(w, w - shift);
        for (int64_t oh = 0; oh < h; ++oh) {
          const int64_t ih = oh + di - pad;
          T* dst = row + oh * w;
          if (ih < 0 || ih >= h) {
            std::fill(dst, dst + w, T{0});
            continue;
          }
          const T* src = plane + ih * w;
          if (shift == 0) {
            std::copy(src, src + w, dst);
          } else {
            std::fill(dst, dst + w, T{0});
            for (int64_t ow = src_lo; ow < src_hi; ++ow) dst[ow] = src[ow + shift];
          }
        }
      }
    }
  }
}

// Adjoint of im2col: accumulates column-matrix gradients back onto the
// (zero-padded) input gradient.
template <typename T>
void col2im_add(const T* col, int64_t cin, int64_t h, int64_t w, int64_t k, T* dx) {
  const int64_t pad = k / 2;
  const int64_t hw = h * w;
  for (int64_t ci = 0; ci < cin; ++ci) {
    T* dplane = dx + ci * hw;
    for (int64_t di = 0; di < k; ++di) {
      for (int64_t dj = 0; dj < k; ++dj) {
        const T* row = col + ((ci * k + di) * k + dj) * hw;
        const int64_t shift = dj - pad;
        const int64_t src_lo = std::max<int64_t>(0, -shift);
        const int64_t src_hi = std::min<int64_t>(w, w - shift);
        for (int64_t oh = 0; oh < h; ++oh) {
          const int64_t ih = oh + di - pad;
          if (ih < 0 || ih >= h) continue;
          const T* src = row + oh * w;
          T* dst = dplane + ih * w;
          for (int64_t ow = src_lo; ow < src_hi; ++ow) dst[ow + shift] += src[ow];
        }
      }
    }
  }
}

template <typename T, int Slot>
std::vector<T>& scratch_buffer(size_t n) {
  thread_local std::vector<T> buf;
  if (buf.size() < n) buf.resize(n);
  return buf;
}

}  // namespace detail

// 2-D cross-correlation, stride 1, zero padding k/2 (k in {1, 3} is what the
// model uses; any odd k works). x: [B,Cin,H,W], w: [Cout,Cin,k,k], b: [Cout].
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  const Shape& xs = x.shape();
  const Shape& ws = w.shape();
  detail::require(xs.rank == 4, ErrorCode::ShapeMismatch, "conv2d: input must be 4-D, got " + xs.str());
  detail::require(ws.rank == 4, ErrorCode::ShapeMismatch, "conv2d: weight must be 4-D, got " + ws.str());
  detail::require(ws[2] == ws[3] && ws[2] % 2 == 1, ErrorCode::ShapeMismatch,
                  "conv2d: kernel must be odd square, got " + ws.str());
  detail::require(xs[1] == ws[1], ErrorCode::ShapeMismatch,
                  "conv2d: input channels " + std::to_string(xs[1]) + " != weight channels " +
                      std::to_string(ws[1]));
  detail::require(b.shape().rank == 1 && b.shape()[0] == ws[0], ErrorCode::ShapeMismatch,
                  "conv2d: bias shape " + b.shape().str() + " must be [Cout]");

  const int64_t batch = xs[0], cin = xs[1], h = xs[2], width = xs[3];
  const int64_t cout = ws[0], k = ws[2];
  const int64_t ck = cin * k * k;
  const int64_t hw = h * width;

  Tensor<T> y = Tensor<T>::zeros(Shape{batch, cout, h, width});
  ConstMapRM<T> wmat(w.values().data(), cout, ck);
  const T* bias = b.values().data();

  parallel_for(batch, [&](int64_t bi) {
    std::vector<T>& col = detail::scratch_buffer<T, 0>(static_cast<size_t>(ck * hw));
    detail::im2col(x.values().data() + bi * cin * hw, cin, h, width, k, col.data());
    ConstMapRM<T> colm(col.data(), ck, hw);
    MapRM<T> out(y.values().data() + bi * cout * hw, cout, hw);
    out.noalias() = wmat * colm;
    for (int64_t co = 0; co < cout; ++co) out.row(co).array() += bias[co];
  });

  if (!track_grad<T>({&x, &w, &b})) return y;

  auto xn = x.node(), wn = w.node(), bn = b.node();
  y.node()->requires_grad = true;
  y.node()->parents = {xn, wn, bn};
  y.node()->backward_fn = [xn, wn, bn, batch, cin, cout, h, width, k, ck,
                           hw](TensorNode<T>& self) {
    ConstMapRM<T> wmat(wn->value.data(), cout, ck);
    const bool need_dx = xn->requires_grad;
    const bool need_dw = wn->requires_grad;
    const bool need_db = bn->requires_grad;
    if (need_dx) xn->ensure_grad();
    if (need_dw) wn->ensure_grad();
    if (need_db) bn->ensure_grad();

    // per-sample weight/bias contributions, reduced in batch order below
    std::vector<T> dw_parts(need_dw ? static_cast<size_t>(batch * cout * ck) : 0);
    std::vector<T> db_parts(need_db ? static_cast<size_t>(batch * cout) : 0);

    parallel_for(batch, [&](int64_t bi) {
      ConstMapRM<T> dy(self.grad.data() + bi * cout * hw, cout, hw);
      if (need_dw) {
        std::vector<T>& col = detail::scratch_buffer<T, 0>(static_cast<size_t>(ck * hw));
        detail::im2col(xn->value.data() + bi * cin * hw, cin, h, width, k, col.data());
        ConstMapRM<T> colm(col.data(), ck, hw);
        MapRM<T> dwp(dw_parts.data() + bi * cout * ck, cout, ck);
        dwp.noalias() = dy * colm.transpose();
      }
      if (need_db) {
        MapRM<T> dbp(db_parts.data() + bi * cout, cout, 1);
        dbp.noalias() = dy.rowwise().sum();
      }
      if (need_dx) {
        std::vector<T>& dcol = detail::scratch_buffer<T, 1>(static_cast<size_t>(ck * hw));
        MapRM<T> dcolm(dcol.data(), ck, hw);
        dcolm.noalias() = wmat.transpose() * dy;
        detail::col2im_add(dcol.data(), cin, h, width, k, xn->grad.data() + bi * cin * hw);
      }
    });

    if (need_dw) {
      ArrayMap<T> dw(wn->grad.data(), cout * ck);
      for (int64_t bi = 0; bi < batch; ++bi)
        dw += ConstArrayMap<T>(dw_parts.data() + bi * cout * ck, cout * ck);
    }
    if (need_db) {
      ArrayMap<T> db(bn->grad.data(), cout);
      for (int64_t bi = 0; bi < batch; ++bi)
        db += ConstArrayMap<T>(db_parts.data() + bi * cout, cout);
    }
  };
  return y;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  Tensor<T> y = Tensor<T>::zeros(x.shape());
  auto xv = x.values();
  auto yv = y.values();
  for (size_t i = 0; i < xv.size(); ++i) yv[i] = xv[i] > T{0} ? xv[i] : T{0};
  if (!track_grad<T>({&x})) return y;
  auto xn = x.node();
  y.node()->requires_grad = true;
  y.node()->parents = {xn};
  y.node()->backward_fn = [xn](TensorNode<T>& self) {
    xn->ensure_grad();
    for (size_t i = 0; i < self.grad.size(); ++i)
      if (xn->value[i] > T{0}) xn->grad[i] += self.grad[i];
  };
  return y;
}

// 2x2 max pooling, stride 2. Gradient routes to the argmax; ties go to the
// first entry in row-major window order.
template <typename T>
Tensor<T> maxpool2(const Tensor<T>& x) {
  const Shape& s = x.shape();
  detail::require(s.rank == 4, ErrorCode::ShapeMismatch, "maxpool2: input must be 4-D");
  detail::require(s[2] % 2 == 0 && s[3] % 2 == 0, ErrorCode::ShapeMismatch,
                  "maxpool2: spatial dims must be even, got " + s.str());
  const int64_t planes = s[0] * s[1], h = s[2], w = s[3];
  const int64_t oh = h / 2, ow = w / 2;
  Tensor<T> y = Tensor<T>::zeros(Shape{s[0], s[1], oh, ow});

  auto argmax = std::make_shared<std::vector<int64_t>>(static_cast<size_t>(planes * oh * ow));
  const T* xv = x.values().data();
  T* yv = y.values().data();
  int64_t* am = argmax->data();
  for (int64_t p = 0; p < planes; ++p) {
    const T* in = xv + p * h * w;
    for (int64_t i = 0; i < oh; ++i) {
      for (int64_t j = 0; j < ow; ++j) {
        const int64_t base = (2 * i) * w + 2 * j;
        const int64_t cand[4] = {base, base + 1, base + w, base + w + 1};
        int64_t best = cand[0];
        T bv = in[best];
        for (int c = 1; c < 4; ++c)
          if (in[cand[c]] > bv) {
            best = cand[c];
            bv = in[cand[c]];
          }
        yv[(p * oh + i) * ow + j] = bv;
        am[(p * oh + i) * ow + j] = p * h * w + best;
      }
    }
  }
  if (!track_grad<T>({&x})) return y;
  auto xn = x.node();
  y.node()->requires_grad = true;
  y.node()->parents = {xn};
  y.node()->backward_fn = [xn, argmax](TensorNode<T>& self) {
    xn->ensure_grad();
    for (size_t i = 0; i < self.grad.size(); ++i) (*xn).grad[(*argmax)[i]] += self.grad[i];
  };
  return y;
}

// Nearest-neighbour x2 upsampling.
template <typename T>
Tensor<T> upsample2(const Tensor<T>& x) {
  const Shape& s = x.shape();
  detail::require(s.rank == 4, ErrorCode::ShapeMismatch, "upsample2: input must be 4-D");
  const int64_t planes = s[0] * s[1], h = s[2], w = s[3];
  Tensor<T> y = Tensor<T>::zeros(Shape{s[0], s[1], 2 * h, 2 * w});
  const T* xv = x.values().data();
  T* yv = y.values().data();
  for (int64_t p = 0; p < planes; ++p) {
    const T* in = xv + p * h * w;
    T* out = yv + p * 4 * h * w;
    for (int64_t i = 0; i < h; ++i) {
      T* row0 = out + (2 * i) * 2 * w;
      for (int64_t j = 0; j < w; ++j) {
        row0[2 * j] = in[i * w + j];
        row0[2 * j + 1] = in[i * w + j];
      }
      std::copy(row0, row0 + 2 * w, row0 + 2 * w);
    }
  }
  if (!track_grad<T>({&x})) return y;
  auto xn = x.node();
  y.node()->requires_grad = true;
  y.node()->parents = {xn};
  y.node()->backward_fn = [xn, planes, h, w](TensorNode<T>& self) {
    xn->ensure_grad();
    for (int64_t p = 0; p < planes; ++p) {
      const T* dout = self.grad.data() + p * 4 * h * w;
      T* din = xn->grad.data() + p * h * w;
      for (int64_t i = 0; i < h; ++i)
        for (int64_t j = 0; j < w; ++j)
          din[i * w + j] += dout[(2 * i) * 2 * w + 2 * j] + dout[(2 * i) * 2 * w + 2 * j + 1] +
                            dout[(2 * i + 1) * 2 * w + 2 * j] +
                            dout[(2 * i + 1) * 2 * w + 2 * j + 1];
    }
  };
  return y;
}

// Channel-axis concatenation of two [B,C,H,W] tensors.
template <typename T>
Tensor<T> concat(const Tensor<T>& a, const Tensor<T>& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  detail::require(sa.rank == 4 && sb.rank == 4, ErrorCode::ShapeMismatch,
                  "concat: inputs must be 4-D");
  detail::require(sa[0] == sb[0] && sa[2] == sb[2] && sa[3] == sb[3], ErrorCode::ShapeMismatch,
                  "concat: non-channel dims differ: " + sa.str() + " vs " + sb.str());
  const int64_t batch = sa[0], ca = sa[1], cb = sb[1], hw = sa[2] * sa[3];
  Tensor<T> y = Tensor<T>::zeros(Shape{batch, ca + cb, sa[2], sa[3]});
  T* yv = y.values().data();
  const T* av = a.values().data();
  const T* bv = b.values().data();
  for (int64_t bi = 0; bi < batch; ++bi) {
    std::copy(av + bi * ca * hw, av + (bi + 1) * ca * hw, yv + bi * (ca + cb) * hw);
    std::copy(bv + bi * cb * hw, bv + (bi + 1) * cb * hw, yv + bi * (ca + cb) * hw + ca * hw);
  }
  if (!track_grad<T>({&a, &b})) return y;
  auto an = a.node(), bn = b.node();
  y.node()->requires_grad = true;
  y.node()->parents = {an, bn};
  y.node()->backward_fn = [an, bn, batch, ca, cb, hw](TensorNode<T>& self) {
    if (an->requires_grad) {
      an->ensure_grad();
      for (int64_t bi = 0; bi < batch; ++bi) {
        const T* src = self.grad.data() + bi * (ca + cb) * hw;
        T* dst = an->grad.data() + bi * ca * hw;
        for (int64_t i = 0; i < ca * hw; ++i) dst[i] += src[i];
      }
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      for (int64_t bi = 0; bi < batch; ++bi) {
        const T* src = self.grad.data() + bi * (ca + cb) * hw + ca * hw;
        T* dst = bn->grad.data() + bi * cb * hw;
        for (int64_t i = 0; i < cb * hw; ++i) dst[i] += src[i];
      }
    }
  };
  return y;
}

template <typename T>
T stable_sigmoid(T v) {
  if (v >= T{0}) return T{1} / (T{1} + std::exp(-v));
  const T e = std::exp(v);
  return e / (T{1} + e);
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  Tensor<T> y = Tensor<T>::zeros(x.shape());
  auto xv = x.values();
  auto yv = y.values();
  for (size_t i = 0; i < xv.size(); ++i) yv[i] = stable_sigmoid(xv[i]);
  if (!track_grad<T>({&x})) return y;
  auto xn = x.node();
  auto yn = y.node();
  y.node()->requires_grad = true;
  y.node()->parents = {xn};
  y.node()->backward_fn = [xn, yn](TensorNode<T>& self) {
    xn->ensure_grad();
    for (size_t i = 0; i < self.grad.size(); ++i) {
      const T s = yn->value[i];
      xn->grad[i] += self.grad[i] * s * (T{1} - s);
    }
  };
  return y;
}

// Mean binary cross-entropy over non-ignored pixels, from logits, in the
// numerically stable form max(z,0) - z*y + log1p(exp(-|z|)). Ignored pixels
// contribute nothing to the value or the gradient.
template <typename T>
Tensor<T> bce_with_logits(const Tensor<T>& logits, const Tensor<T>& target,
                          const std::vector<uint8_t>& ignore_mask) {
  detail::require(logits.shape() == target.shape(), ErrorCode::ShapeMismatch,
                  "bce_with_logits: logits " + logits.shape().str() + " vs target " +
                      target.shape().str());
  const auto zv = logits.values();
  const auto tv = target.values();
  detail::require(ignore_mask.empty() || ignore_mask.size() == zv.size(), ErrorCode::ShapeMismatch,
                  "bce_with_logits: ignore mask length mismatch");

  int64_t counted = 0;
  T sum{0};
  for (size_t i = 0; i < zv.size(); ++i) {
    if (!ignore_mask.empty() && ignore_mask[i]) continue;
    const T z = zv[i];
    const T y = tv[i];
    sum += std::max(z, T{0}) - z * y + std::log1p(std::exp(-std::abs(z)));
    ++counted;
  }
  if (counted == 0) fail(ErrorCode::EmptyLoss, "bce_with_logits: every pixel is ignored");
  Tensor<T> loss = Tensor<T>::from_data(Shape{1}, {sum / static_cast<T>(counted)});

  if (!track_grad<T>({&logits})) return loss;
  auto zn = logits.node(), tn = target.node();
  loss.node()->requires_grad = true;
  loss.node()->parents = {zn};
  const T inv_count = T{1} / static_cast<T>(counted);
  loss.node()->backward_fn = [zn, tn, ignore_mask, inv_count](TensorNode<T>& self) {
    zn->ensure_grad();
    const T g = self.grad[0];
    for (size_t i = 0; i < zn->value.size(); ++i) {
      if (!ignore_mask.empty() && ignore_mask[i]) continue;
      zn->grad[i] += g * (stable_sigmoid(zn->value[i]) - tn->value[i]) * inv_count;
    }
  };
  return loss;
}

}  // namespace terraseg
