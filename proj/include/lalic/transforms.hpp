// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "lalic/birwkv.hpp"
#include "lalic/config.hpp"
#include "lalic/tensor.hpp"
#include "lalic/weights.hpp"

namespace lalic {

/// Strided or transposed convolution with "same"-style padding: stride 2
/// halves (conv) or doubles (transposed) even extents.
template <typename Real>
struct ConvLayer {
  BasicTensor<Real> weight;
  std::vector<Real> bias;
  std::size_t stride = 1;
  bool transposed = false;

  BasicTensor<Real> operator()(const BasicTensor<Real>& x) const;

  static ConvLayer load(const WeightStore& store, const std::string& prefix,
                        std::size_t stride, bool transposed);
};

template <typename Real>
struct TransformStage {
  ConvLayer<Real> resample;
  std::vector<block::BlockParams<Real>> blocks;
};

/// g_a, g_s, h_a and h_s with parameters resolved from a WeightStore.
///
///   g_a: 4 x [Conv(k,s2) -> L_i blocks], widths (C1,C2,C3,M)
///   g_s: mirror of g_a with transposed convs, output clamped to [0,1]
///   h_a: Conv(s1) -> blocks -> Conv(s2) -> blocks -> Conv(s2), M -> N
///   h_s: Deconv(s2) -> blocks -> Deconv(s2) -> blocks -> Conv(s1), N -> 2M
template <typename Real>
class Transforms {
 public:
  static Transforms from_store(const WeightStore& store);

  const ModelConfig& config() const { return config_; }

  /// (3,H,W) -> (M,H/16,W/16). H and W must be multiples of 64.
  BasicTensor<Real> analysis(const BasicTensor<Real>& x) const;
  /// (M,h,w) -> (3,16h,16w), clamped to [0,1].
  BasicTensor<Real> synthesis(const BasicTensor<Real>& y_hat) const;
  /// (M,h,w) -> (N,h/4,w/4). h and w must be multiples of 4.
  BasicTensor<Real> hyper_analysis(const BasicTensor<Real>& y) const;
  /// (N,h,w) -> (2M,4h,4w).
  BasicTensor<Real> hyper_synthesis(const BasicTensor<Real>& z_hat) const;

 private:
  ModelConfig config_;
  std::vector<TransformStage<Real>> analysis_;
  std::vector<TransformStage<Real>> synthesis_;  // blocks first, then resample
  std::vector<TransformStage<Real>> hyper_analysis_;
  std::vector<TransformStage<Real>> hyper_synthesis_;
};

/// Runs `blocks` in order.
template <typename Real>
BasicTensor<Real> run_blocks(BasicTensor<Real> f,
                             const std::vector<block::BlockParams<Real>>& blocks);

}  // namespace lalic
