// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lalic/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lalic/simd/kernels.hpp"

namespace lalic::ops {
namespace {

// Upper bound on im2col scratch, in elements. Blocking depends only on
// shapes, so results never depend on the machine.
constexpr std::size_t kScratchElements = std::size_t{1} << 22;

std::string dims(const Shape& s) { return to_string(s); }

template <typename Real>
void check_bias(std::span<const Real> bias, std::size_t channels,
                const char* op) {
  check_arg(bias.empty() || bias.size() == channels,
            std::string(op) + ": bias length " + std::to_string(bias.size()) +
                " != output channels " + std::to_string(channels));
}

// Writes rows [row0, row0 + rows) of the im2col matrix of x, one matrix row
// per (cin, ky, kx), one column per output position.
template <typename Real>
void im2col(const BasicTensor<Real>& x, std::size_t k, std::size_t stride,
            std::size_t pad, std::size_t ho0, std::size_t rows,
            std::size_t wo, Real* col) {
  const std::size_t cin = x.dim(0), h = x.dim(1), w = x.dim(2);
  const std::size_t ncols = rows * wo;
  for (std::size_t c = 0; c < cin; ++c) {
    const Real* plane = x.data() + c * h * w;
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        Real* dst = col + ((c * k + ky) * k + kx) * ncols;
        for (std::size_t r = 0; r < rows; ++r) {
          const long iy = long((ho0 + r) * stride + ky) - long(pad);
          Real* d = dst + r * wo;
          if (iy < 0 || iy >= long(h)) {
            std::fill(d, d + wo, Real(0));
            continue;
          }
          const Real* src = plane + std::size_t(iy) * w;
          for (std::size_t ox = 0; ox < wo; ++ox) {
            const long ix = long(ox * stride + kx) - long(pad);
            d[ox] = (ix < 0 || ix >= long(w)) ? Real(0) : src[ix];
          }
        }
      }
    }
  }
}

}  // namespace

template <typename Real>
BasicTensor<Real> conv2d(const BasicTensor<Real>& x,
                         const BasicTensor<Real>& kernel,
                         std::span<const Real> bias, std::size_t stride,
                         std::size_t pad) {
  check_arg(x.rank() == 3, "conv2d: input must be (C,H,W), got " +
                               dims(x.shape()));
  check_arg(kernel.rank() == 4 && kernel.dim(2) == kernel.dim(3),
            "conv2d: kernel must be (Cout,Cin,k,k), got " +
                dims(kernel.shape()));
  check_arg(stride >= 1, "conv2d: stride must be >= 1");
  const std::size_t cout = kernel.dim(0), cin = kernel.dim(1),
                    k = kernel.dim(2);
  check_arg(x.dim(0) == cin, "conv2d: input channels " +
                                 std::to_string(x.dim(0)) +
                                 " != kernel Cin " + std::to_string(cin));
  check_bias(bias, cout, "conv2d");
  const std::size_t h = x.dim(1), w = x.dim(2);
  check_arg(h + 2 * pad >= k && w + 2 * pad >= k,
            "conv2d: kernel " + std::to_string(k) + " larger than padded input " +
                dims(x.shape()));
  const std::size_t ho = (h + 2 * pad - k) / stride + 1;
  const std::size_t wo = (w + 2 * pad - k) / stride + 1;
  const std::size_t t = ho * wo;

  BasicTensor<Real> out({cout, ho, wo});
  if (!bias.empty()) {
    for (std::size_t o = 0; o < cout; ++o) {
      std::fill_n(out.data() + o * t, t, bias[o]);
    }
  }

  const std::size_t depth = cin * k * k;
  const std::size_t rows_per_block =
      std::max<std::size_t>(1, kScratchElements / std::max<std::size_t>(1, depth * wo));
  std::vector<Real> col;
  for (std::size_t r0 = 0; r0 < ho; r0 += rows_per_block) {
    const std::size_t rows = std::min(rows_per_block, ho - r0);
    const std::size_t ncols = rows * wo;
    col.resize(depth * ncols);
    im2col(x, k, stride, pad, r0, rows, wo, col.data());
    simd::gemm_acc(cout, ncols, depth, kernel.data(), depth, col.data(), ncols,
                   out.data() + r0 * wo, t);
  }
  return out;
}

template <typename Real>
BasicTensor<Real> deconv2d(const BasicTensor<Real>& x,
                           const BasicTensor<Real>& kernel,
                           std::span<const Real> bias, std::size_t stride,
                           std::size_t pad, std::size_t out_pad) {
  check_arg(x.rank() == 3, "deconv2d: input must be (C,H,W), got " +
                               dims(x.shape()));
  check_arg(kernel.rank() == 4 && kernel.dim(2) == kernel.dim(3),
            "deconv2d: kernel must be (Cin,Cout,k,k), got " +
                dims(kernel.shape()));
  check_arg(stride >= 1, "deconv2d: stride must be >= 1");
  const std::size_t cin = kernel.dim(0), cout = kernel.dim(1),
                    k = kernel.dim(2);
  check_arg(x.dim(0) == cin, "deconv2d: input channels " +
                                 std::to_string(x.dim(0)) +
                                 " != kernel Cin " + std::to_string(cin));
  check_arg(out_pad < stride, "deconv2d: out_pad must be < stride");
  check_bias(bias, cout, "deconv2d");
  const std::size_t h = x.dim(1), w = x.dim(2);
  check_arg((h - 1) * stride + k + out_pad >= 2 * pad &&
                (w - 1) * stride + k + out_pad >= 2 * pad,
            "deconv2d: padding exceeds output extent");
  const std::size_t ho = (h - 1) * stride + k + out_pad - 2 * pad;
  const std::size_t wo = (w - 1) * stride + k + out_pad - 2 * pad;

  BasicTensor<Real> out({cout, ho, wo});
  if (!bias.empty()) {
    for (std::size_t o = 0; o < cout; ++o) {
      std::fill_n(out.data() + o * ho * wo, ho * wo, bias[o]);
    }
  }

  // kernel viewed as (Cin, Cout*k*k); col = kernel^T * x.
  const std::size_t depth = cout * k * k;
  std::vector<Real> kt(depth * cin);
  for (std::size_t i = 0; i < cin; ++i) {
    for (std::size_t j = 0; j < depth; ++j) kt[j * cin + i] = kernel[i * depth + j];
  }

  const std::size_t rows_per_block =
      std::max<std::size_t>(1, kScratchElements / std::max<std::size_t>(1, depth * w));
  std::vector<Real> col;
  for (std::size_t r0 = 0; r0 < h; r0 += rows_per_block) {
    const std::size_t rows = std::min(rows_per_block, h - r0);
    const std::size_t ncols = rows * w;
    col.assign(depth * ncols, Real(0));
    simd::gemm_acc(depth, ncols, cin, kt.data(), cin, x.data() + r0 * w, h * w,
                   col.data(), ncols);
    for (std::size_t o = 0; o < cout; ++o) {
      Real* plane = out.data() + o * ho * wo;
      for (std::size_t ky = 0; ky < k; ++ky) {
        for (std::size_t kx = 0; kx < k; ++kx) {
          const Real* src = col.data() + ((o * k + ky) * k + kx) * ncols;
          for (std::size_t r = 0; r < rows; ++r) {
            const long oy = long((r0 + r) * stride + ky) - long(pad);
            if (oy < 0 || oy >= long(ho)) continue;
            Real* dst = plane + std::size_t(oy) * wo;
            for (std::size_t ix = 0; ix < w; ++ix) {
              const long ox = long(ix * stride + kx) - long(pad);
              if (ox < 0 || ox >= long(wo)) continue;
              dst[ox] = dst[ox] + src[r * w + ix];
            }
          }
        }
      }
    }
  }
  return out;
}

template <typename Real>
BasicTensor<Real> depthwise_conv2d(const BasicTensor<Real>& x,
                                   const BasicTensor<Real>& kernel) {
  check_arg(x.rank() == 3, "depthwise_conv2d: input must be (C,H,W), got " +
                               dims(x.shape()));
  check_arg(kernel.rank() == 4 && kernel.dim(1) == 1 &&
                kernel.dim(2) == kernel.dim(3) && kernel.dim(2) % 2 == 1,
            "depthwise_conv2d: kernel must be (C,1,k,k) with odd k, got " +
                dims(kernel.shape()));
  check_arg(kernel.dim(0) == x.dim(0),
            "depthwise_conv2d: kernel channels " +
                std::to_string(kernel.dim(0)) + " != input channels " +
                std::to_string(x.dim(0)));
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  const std::size_t k = kernel.dim(2), pad = k / 2;
  const std::size_t pw = w + 2 * pad, ph = h + 2 * pad;

  // Output is computed on a (H, W + 2*pad) grid so that every tap is one
  // contiguous axpy; the extra columns are dropped afterwards.
  BasicTensor<Real> out({c, h, w});
  std::vector<Real> padded(ph * pw + 2 * pad);
  std::vector<Real> acc(h * pw);
  for (std::size_t ch = 0; ch < c; ++ch) {
    std::fill(padded.begin(), padded.end(), Real(0));
    const Real* src = x.data() + ch * h * w;
    for (std::size_t y = 0; y < h; ++y) {
      std::copy_n(src + y * w, w, padded.data() + (y + pad) * pw + pad);
    }
    std::fill(acc.begin(), acc.end(), Real(0));
    const Real* kc = kernel.data() + ch * k * k;
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        simd::axpy(h * pw, kc[ky * k + kx], padded.data() + ky * pw + kx,
                   acc.data());
      }
    }
    Real* dst = out.data() + ch * h * w;
    for (std::size_t y = 0; y < h; ++y) {
      std::copy_n(acc.data() + y * pw, w, dst + y * w);
    }
  }
  return out;
}

template <typename Real>
BasicTensor<Real> layer_norm(const BasicTensor<Real>& x,
                             std::span<const Real> gamma,
                             std::span<const Real> beta, Real eps) {
  check_arg(x.rank() == 2, "layer_norm: input must be (C,T), got " +
                               dims(x.shape()));
  const std::size_t c = x.dim(0), t = x.dim(1);
  check_arg(gamma.size() == c && beta.size() == c,
            "layer_norm: gamma/beta length must equal C=" + std::to_string(c));
  std::vector<Real> mean(t, Real(0)), var(t, Real(0));
  for (std::size_t ch = 0; ch < c; ++ch) {
    const Real* row = x.data() + ch * t;
    for (std::size_t i = 0; i < t; ++i) mean[i] = mean[i] + row[i];
  }
  const Real inv_c = Real(1) / Real(c);
  for (std::size_t i = 0; i < t; ++i) mean[i] = mean[i] * inv_c;
  for (std::size_t ch = 0; ch < c; ++ch) {
    const Real* row = x.data() + ch * t;
    for (std::size_t i = 0; i < t; ++i) {
      const Real d = row[i] - mean[i];
      var[i] = var[i] + d * d;
    }
  }
  for (std::size_t i = 0; i < t; ++i) {
    var[i] = Real(1) / std::sqrt(var[i] * inv_c + eps);
  }
  BasicTensor<Real> out(x.shape());
  for (std::size_t ch = 0; ch < c; ++ch) {
    const Real* row = x.data() + ch * t;
    Real* dst = out.data() + ch * t;
    const Real g = gamma[ch], b = beta[ch];
    for (std::size_t i = 0; i < t; ++i) {
      dst[i] = (row[i] - mean[i]) * var[i] * g + b;
    }
  }
  return out;
}

template <typename Real>
BasicTensor<Real> linear(const BasicTensor<Real>& x,
                         const BasicTensor<Real>& weight,
                         std::span<const Real> bias) {
  check_arg(x.rank() == 2, "linear: input must be (Cin,T), got " +
                               dims(x.shape()));
  check_arg(weight.rank() == 2, "linear: weight must be (Cout,Cin), got " +
                                    dims(weight.shape()));
  const std::size_t cout = weight.dim(0), cin = weight.dim(1), t = x.dim(1);
  check_arg(x.dim(0) == cin, "linear: input channels " +
                                 std::to_string(x.dim(0)) +
                                 " != weight Cin " + std::to_string(cin));
  check_bias(bias, cout, "linear");
  BasicTensor<Real> out({cout, t});
  if (!bias.empty()) {
    for (std::size_t o = 0; o < cout; ++o) {
      std::fill_n(out.data() + o * t, t, bias[o]);
    }
  }
  simd::gemm_acc(cout, t, cin, weight.data(), cin, x.data(), t, out.data(), t);
  return out;
}

template <typename Real>
Real sigmoid(Real v) {
  return Real(1) / (Real(1) + std::exp(-v));
}

template <typename Real>
BasicTensor<Real> sigmoid(BasicTensor<Real> x) {
  for (Real& v : x.values()) v = sigmoid(v);
  return x;
}

template <typename Real>
BasicTensor<Real> squared_relu(BasicTensor<Real> x) {
  for (Real& v : x.values()) {
    const Real r = v > Real(0) ? v : Real(0);
    v = r * r;
  }
  return x;
}

template <typename Real>
void add_inplace(BasicTensor<Real>& a, const BasicTensor<Real>& b) {
  check_arg(a.shape() == b.shape(), "add: shape " + dims(a.shape()) +
                                        " != " + dims(b.shape()));
  Real* pa = a.data();
  const Real* pb = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) pa[i] = pa[i] + pb[i];
}

template <typename Real>
void mul_inplace(BasicTensor<Real>& a, const BasicTensor<Real>& b) {
  check_arg(a.shape() == b.shape(), "mul: shape " + dims(a.shape()) +
                                        " != " + dims(b.shape()));
  Real* pa = a.data();
  const Real* pb = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) pa[i] = pa[i] * pb[i];
}

template <typename Real>
BasicTensor<Real> concat_channels(
    std::span<const BasicTensor<Real>* const> parts) {
  check_arg(!parts.empty(), "concat_channels: no inputs");
  Shape shape = parts[0]->shape();
  check_arg(!shape.empty(), "concat_channels: rank-0 input");
  std::size_t channels = 0;
  for (const auto* p : parts) {
    check_arg(p->rank() == shape.size() &&
                  std::equal(shape.begin() + 1, shape.end(),
                             p->shape().begin() + 1),
              "concat_channels: trailing extents differ: " + dims(shape) +
                  " vs " + dims(p->shape()));
    channels += p->dim(0);
  }
  shape[0] = channels;
  BasicTensor<Real> out(shape);
  Real* dst = out.data();
  for (const auto* p : parts) dst = std::copy_n(p->data(), p->size(), dst);
  return out;
}

template <typename Real>
BasicTensor<Real> slice_channels(const BasicTensor<Real>& x, std::size_t begin,
                                 std::size_t end) {
  check_arg(x.rank() >= 1 && begin <= end && end <= x.dim(0),
            "slice_channels: range [" + std::to_string(begin) + "," +
                std::to_string(end) + ") outside " + dims(x.shape()));
  Shape shape = x.shape();
  const std::size_t plane = x.size() / std::max<std::size_t>(1, shape[0]);
  shape[0] = end - begin;
  std::vector<Real> data(x.data() + begin * plane, x.data() + end * plane);
  return BasicTensor<Real>(std::move(shape), std::move(data));
}

template <typename Real>
BasicTensor<Real> pad_replicate(const BasicTensor<Real>& x, std::size_t h2,
                                std::size_t w2) {
  check_arg(x.rank() == 3 && x.dim(1) > 0 && x.dim(2) > 0,
            "pad_replicate: input must be non-empty (C,H,W)");
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  check_arg(h2 >= h && w2 >= w, "pad_replicate: target smaller than input");
  BasicTensor<Real> out({c, h2, w2});
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < h2; ++y) {
      const std::size_t sy = std::min(y, h - 1);
      for (std::size_t xx = 0; xx < w2; ++xx) {
        out.at(ch, y, xx) = x.at(ch, sy, std::min(xx, w - 1));
      }
    }
  }
  return out;
}

template <typename Real>
BasicTensor<Real> crop(const BasicTensor<Real>& x, std::size_t h,
                       std::size_t w) {
  check_arg(x.rank() == 3 && h <= x.dim(1) && w <= x.dim(2),
            "crop: " + std::to_string(h) + "x" + std::to_string(w) +
                " exceeds " + dims(x.shape()));
  const std::size_t c = x.dim(0);
  BasicTensor<Real> out({c, h, w});
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < h; ++y) {
      std::copy_n(&x.at(ch, y, 0), w, &out.at(ch, y, 0));
    }
  }
  return out;
}

#define LALIC_INSTANTIATE_OPS(Real)                                          \
  template BasicTensor<Real> conv2d(const BasicTensor<Real>&,                \
                                    const BasicTensor<Real>&,                \
                                    std::span<const Real>, std::size_t,      \
                                    std::size_t);                            \
  template BasicTensor<Real> deconv2d(                                       \
      const BasicTensor<Real>&, const BasicTensor<Real>&,                    \
      std::span<const Real>, std::size_t, std::size_t, std::size_t);         \
  template BasicTensor<Real> depthwise_conv2d(const BasicTensor<Real>&,      \
                                              const BasicTensor<Real>&);     \
  template BasicTensor<Real> layer_norm(const BasicTensor<Real>&,            \
                                        std::span<const Real>,               \
                                        std::span<const Real>, Real);        \
  template BasicTensor<Real> linear(const BasicTensor<Real>&,                \
                                    const BasicTensor<Real>&,                \
                                    std::span<const Real>);                  \
  template BasicTensor<Real> sigmoid(BasicTensor<Real>);                     \
  template BasicTensor<Real> squared_relu(BasicTensor<Real>);                \
  template Real sigmoid(Real);                                               \
  template void add_inplace(BasicTensor<Real>&, const BasicTensor<Real>&);   \
  template void mul_inplace(BasicTensor<Real>&, const BasicTensor<Real>&);   \
  template BasicTensor<Real> concat_channels(                                \
      std::span<const BasicTensor<Real>* const>);                            \
  template BasicTensor<Real> slice_channels(const BasicTensor<Real>&,        \
                                            std::size_t, std::size_t);       \
  template BasicTensor<Real> pad_replicate(const BasicTensor<Real>&,         \
                                           std::size_t, std::size_t);        \
  template BasicTensor<Real> crop(const BasicTensor<Real>&, std::size_t,     \
                                  std::size_t);

LALIC_INSTANTIATE_OPS(float)
LALIC_INSTANTIATE_OPS(double)

#undef LALIC_INSTANTIATE_OPS

}  // namespace lalic::ops
