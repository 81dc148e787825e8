// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <vector>

#include "lalic/tensor.hpp"
#include "lalic/wkv.hpp"

namespace lalic::block {

inline constexpr double kLayerNormEps = 1e-5;
inline constexpr std::size_t kShiftKernel = 5;

template <typename Real>
struct LayerNormParams {
  std::vector<Real> gamma;
  std::vector<Real> beta;
};

/// Training-time form of the Omni-Shift: an identity branch plus 1x1, 3x3
/// and 5x5 depthwise branches, each with a per-channel scale.
template <typename Real>
struct OmniShiftBranches {
  std::vector<Real> identity_scale;  // s0
  BasicTensor<Real> kernel1;         // (C,1,1,1)
  std::vector<Real> scale1;
  BasicTensor<Real> kernel3;         // (C,1,3,3)
  std::vector<Real> scale3;
  BasicTensor<Real> kernel5;         // (C,1,5,5)
  std::vector<Real> scale5;

  std::size_t channels() const { return identity_scale.size(); }
};

template <typename Real>
struct SpatialMixParams {
  LayerNormParams<Real> norm;
  BasicTensor<Real> shift;       // merged (C,1,5,5)
  BasicTensor<Real> receptance;  // (C,C)
  BasicTensor<Real> key;         // (C,C)
  BasicTensor<Real> value;       // (C,C)
  wkv::AttentionParams<Real> attention;
  BasicTensor<Real> output;      // (C,C)

  std::size_t width() const { return norm.gamma.size(); }
};

/// Channel-Mix. Without a shift kernel the module has a strict 1x1
/// receptive field (the form used for entropy-parameter aggregation).
template <typename Real>
struct ChannelMixParams {
  LayerNormParams<Real> norm;
  std::optional<BasicTensor<Real>> shift;  // merged (C,1,5,5)
  BasicTensor<Real> receptance;            // (C,C)
  BasicTensor<Real> key;                   // (hidden,C)
  BasicTensor<Real> value;                 // (C,hidden)

  std::size_t width() const { return norm.gamma.size(); }
  std::size_t hidden() const { return key.dim(0); }
};

template <typename Real>
struct BlockParams {
  SpatialMixParams<Real> spatial;
  ChannelMixParams<Real> channel;
};

/// Folds all branches into one (C,1,5,5) kernel: smaller kernels are
/// zero-padded to 5x5 and the identity contributes s0 at the centre tap.
template <typename Real>
BasicTensor<Real> omni_shift_merge(const OmniShiftBranches<Real>& branches);

/// Sum of the individual branch applications on a (C,H,W) map. Equal, up to
/// rounding, to applying the merged kernel.
template <typename Real>
BasicTensor<Real> omni_shift_branches_apply(
    const BasicTensor<Real>& x, const OmniShiftBranches<Real>& branches);

/// O = (sigmoid(R) * BiWKV(K, V)) W_O over the LN -> Omni-Shift features.
template <typename Real>
BasicTensor<Real> spatial_mix(const BasicTensor<Real>& f,
                              const SpatialMixParams<Real>& p);

/// O = sigmoid(R) * (relu(K)^2 W_V) over the LN -> Omni-Shift features.
template <typename Real>
BasicTensor<Real> channel_mix(const BasicTensor<Real>& f,
                              const ChannelMixParams<Real>& p);

/// Channel-Mix on a (C,T) token set. Requires p.shift to be empty since
/// tokens carry no spatial layout here.
template <typename Real>
BasicTensor<Real> channel_mix_tokens(const BasicTensor<Real>& x,
                                     const ChannelMixParams<Real>& p);

/// f1 = f + spatial_mix(f); out = f1 + channel_mix(f1).
template <typename Real>
BasicTensor<Real> birwkv_block(const BasicTensor<Real>& f,
                               const BlockParams<Real>& p);

}  // namespace lalic::block
