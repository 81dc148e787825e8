// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lalic/birwkv.hpp"

#include <string>

#include "lalic/ops.hpp"

namespace lalic::block {
namespace {

template <typename Real>
void check_square(const BasicTensor<Real>& m, std::size_t c, const char* name) {
  check_arg(m.rank() == 2 && m.dim(0) == c && m.dim(1) == c,
            std::string(name) + " must be (" + std::to_string(c) + "," +
                std::to_string(c) + "), got " + to_string(m.shape()));
}

template <typename Real>
void check_map(const BasicTensor<Real>& f, std::size_t c, const char* op) {
  check_arg(f.rank() == 3 && f.dim(0) == c,
            std::string(op) + ": expected (" + std::to_string(c) +
                ",H,W) input, got " + to_string(f.shape()));
}

template <typename Real>
BasicTensor<Real> normalize(const BasicTensor<Real>& x,
                            const LayerNormParams<Real>& p) {
  return ops::layer_norm<Real>(x, p.gamma, p.beta, Real(kLayerNormEps));
}

// LN over tokens, then the shift on the 2-D view; returns (C,T).
template <typename Real>
BasicTensor<Real> norm_and_shift(const BasicTensor<Real>& f,
                                 const LayerNormParams<Real>& norm,
                                 const BasicTensor<Real>* shift) {
  const std::size_t h = f.dim(1), w = f.dim(2);
  BasicTensor<Real> xn = normalize(to_sequence(f), norm);
  if (shift == nullptr) return xn;
  BasicTensor<Real> shifted =
      ops::depthwise_conv2d(from_sequence(std::move(xn), h, w), *shift);
  return to_sequence(std::move(shifted));
}

template <typename Real>
BasicTensor<Real> channel_mix_core(const BasicTensor<Real>& xs,
                                   const ChannelMixParams<Real>& p) {
  BasicTensor<Real> gate = ops::sigmoid(ops::linear<Real>(xs, p.receptance));
  BasicTensor<Real> hidden = ops::squared_relu(ops::linear<Real>(xs, p.key));
  BasicTensor<Real> out = ops::linear<Real>(hidden, p.value);
  ops::mul_inplace(out, gate);
  return out;
}

template <typename Real>
void check_channel_params(const ChannelMixParams<Real>& p) {
  const std::size_t c = p.width();
  check_arg(p.norm.beta.size() == c, "channel_mix: LN beta width mismatch");
  check_square(p.receptance, c, "channel_mix receptance");
  check_arg(p.key.rank() == 2 && p.key.dim(1) == c && p.key.dim(0) >= c,
            "channel_mix key must be (hidden>=C, C), got " +
                to_string(p.key.shape()));
  check_arg(p.value.rank() == 2 && p.value.dim(0) == c &&
                p.value.dim(1) == p.key.dim(0),
            "channel_mix value must be (C, hidden), got " +
                to_string(p.value.shape()));
}

}  // namespace

template <typename Real>
BasicTensor<Real> omni_shift_merge(const OmniShiftBranches<Real>& b) {
  const std::size_t c = b.channels();
  check_arg(b.scale1.size() == c && b.scale3.size() == c && b.scale5.size() == c,
            "omni_shift_merge: branch scale lengths differ");
  check_arg(b.kernel1.shape() == Shape({c, 1, 1, 1}) &&
                b.kernel3.shape() == Shape({c, 1, 3, 3}) &&
                b.kernel5.shape() == Shape({c, 1, 5, 5}),
            "omni_shift_merge: branch kernels must be (C,1,k,k) for k=1,3,5");
  BasicTensor<Real> merged({c, 1, 5, 5});
  for (std::size_t ch = 0; ch < c; ++ch) {
    Real* m = merged.data() + ch * 25;
    const Real* k5 = b.kernel5.data() + ch * 25;
    for (std::size_t i = 0; i < 25; ++i) m[i] = b.scale5[ch] * k5[i];
    const Real* k3 = b.kernel3.data() + ch * 9;
    for (std::size_t y = 0; y < 3; ++y) {
      for (std::size_t x = 0; x < 3; ++x) {
        Real& tap = m[(y + 1) * 5 + (x + 1)];
        tap = tap + b.scale3[ch] * k3[y * 3 + x];
      }
    }
    Real& centre = m[12];
    centre = centre + b.scale1[ch] * b.kernel1[ch];
    centre = centre + b.identity_scale[ch];
  }
  return merged;
}

template <typename Real>
BasicTensor<Real> omni_shift_branches_apply(const BasicTensor<Real>& x,
                                            const OmniShiftBranches<Real>& b) {
  const std::size_t c = b.channels();
  check_map(x, c, "omni_shift_branches_apply");
  auto scaled = [](BasicTensor<Real> k, const std::vector<Real>& s) {
    const std::size_t per = k.size() / k.dim(0);
    for (std::size_t ch = 0; ch < k.dim(0); ++ch) {
      for (std::size_t i = 0; i < per; ++i) k[ch * per + i] *= s[ch];
    }
    return k;
  };
  BasicTensor<Real> out = x;
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (Real& v : out.row(ch)) v *= b.identity_scale[ch];
  }
  ops::add_inplace(out, ops::depthwise_conv2d(x, scaled(b.kernel1, b.scale1)));
  ops::add_inplace(out, ops::depthwise_conv2d(x, scaled(b.kernel3, b.scale3)));
  ops::add_inplace(out, ops::depthwise_conv2d(x, scaled(b.kernel5, b.scale5)));
  return out;
}

template <typename Real>
BasicTensor<Real> spatial_mix(const BasicTensor<Real>& f,
                              const SpatialMixParams<Real>& p) {
  const std::size_t c = p.width();
  check_map(f, c, "spatial_mix");
  check_square(p.receptance, c, "spatial_mix receptance");
  check_square(p.key, c, "spatial_mix key");
  check_square(p.value, c, "spatial_mix value");
  check_square(p.output, c, "spatial_mix output");
  const std::size_t h = f.dim(1), w = f.dim(2);

  const BasicTensor<Real> xs = norm_and_shift(f, p.norm, &p.shift);
  BasicTensor<Real> gate = ops::sigmoid(ops::linear<Real>(xs, p.receptance));
  const BasicTensor<Real> k = ops::linear<Real>(xs, p.key);
  const BasicTensor<Real> v = ops::linear<Real>(xs, p.value);
  ops::mul_inplace(gate, wkv::biwkv_scan(k, v, p.attention));
  return from_sequence(ops::linear<Real>(gate, p.output), h, w);
}

template <typename Real>
BasicTensor<Real> channel_mix(const BasicTensor<Real>& f,
                              const ChannelMixParams<Real>& p) {
  check_channel_params(p);
  check_map(f, p.width(), "channel_mix");
  const std::size_t h = f.dim(1), w = f.dim(2);
  const BasicTensor<Real> xs =
      norm_and_shift(f, p.norm, p.shift ? &*p.shift : nullptr);
  return from_sequence(channel_mix_core(xs, p), h, w);
}

template <typename Real>
BasicTensor<Real> channel_mix_tokens(const BasicTensor<Real>& x,
                                     const ChannelMixParams<Real>& p) {
  check_channel_params(p);
  check_arg(!p.shift, "channel_mix_tokens: shift kernel needs a 2-D map");
  check_arg(x.rank() == 2 && x.dim(0) == p.width(),
            "channel_mix_tokens: expected (" + std::to_string(p.width()) +
                ",T), got " + to_string(x.shape()));
  return channel_mix_core(normalize(x, p.norm), p);
}

template <typename Real>
BasicTensor<Real> birwkv_block(const BasicTensor<Real>& f,
                               const BlockParams<Real>& p) {
  BasicTensor<Real> f1 = f;
  ops::add_inplace(f1, spatial_mix(f, p.spatial));
  BasicTensor<Real> out = f1;
  ops::add_inplace(out, channel_mix(f1, p.channel));
  return out;
}

#define LALIC_INSTANTIATE_BLOCK(Real)                                        \
  template BasicTensor<Real> omni_shift_merge(const OmniShiftBranches<Real>&); \
  template BasicTensor<Real> omni_shift_branches_apply(                      \
      const BasicTensor<Real>&, const OmniShiftBranches<Real>&);             \
  template BasicTensor<Real> spatial_mix(const BasicTensor<Real>&,           \
                                         const SpatialMixParams<Real>&);     \
  template BasicTensor<Real> channel_mix(const BasicTensor<Real>&,           \
                                         const ChannelMixParams<Real>&);     \
  template BasicTensor<Real> channel_mix_tokens(                             \
      const BasicTensor<Real>&, const ChannelMixParams<Real>&);              \
  template BasicTensor<Real> birwkv_block(const BasicTensor<Real>&,          \
                                          const BlockParams<Real>&);

LALIC_INSTANTIATE_BLOCK(float)
LALIC_INSTANTIATE_BLOCK(double)

#undef LALIC_INSTANTIATE_BLOCK

}  // namespace lalic::block
