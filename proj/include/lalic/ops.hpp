// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lalic/tensor.hpp"

// Deterministic network primitives. Every reduction runs in a fixed loop
// order, so identical inputs give bit-identical outputs within a build.
// All ops are instantiated for float and double.

namespace lalic::ops {

/// Cross-correlation of x (Cin,H,W) with kernel (Cout,Cin,k,k), zero padding.
/// Output extents are floor((H + 2*pad - k) / stride) + 1. Empty bias means
/// no bias.
template <typename Real>
BasicTensor<Real> conv2d(const BasicTensor<Real>& x,
                         const BasicTensor<Real>& kernel,
                         std::span<const Real> bias, std::size_t stride,
                         std::size_t pad);

/// Transposed convolution; the exact adjoint of conv2d with the same kernel.
/// kernel is (Cin,Cout,k,k) from the point of view of this op, i.e. the
/// kernel of the conv2d it transposes. Output extents are
/// (H - 1) * stride - 2 * pad + k + out_pad.
template <typename Real>
BasicTensor<Real> deconv2d(const BasicTensor<Real>& x,
                           const BasicTensor<Real>& kernel,
                           std::span<const Real> bias, std::size_t stride,
                           std::size_t pad, std::size_t out_pad);

/// Per-channel "same" convolution, stride 1. kernel is (C,1,k,k), k odd.
template <typename Real>
BasicTensor<Real> depthwise_conv2d(const BasicTensor<Real>& x,
                                   const BasicTensor<Real>& kernel);

/// Normalizes each token of a (C,T) sequence over its C channels.
template <typename Real>
BasicTensor<Real> layer_norm(const BasicTensor<Real>& x,
                             std::span<const Real> gamma,
                             std::span<const Real> beta, Real eps);

/// Per-token affine map: x (Cin,T), weight (Cout,Cin) -> (Cout,T).
template <typename Real>
BasicTensor<Real> linear(const BasicTensor<Real>& x,
                         const BasicTensor<Real>& weight,
                         std::span<const Real> bias = {});

template <typename Real>
BasicTensor<Real> sigmoid(BasicTensor<Real> x);

template <typename Real>
BasicTensor<Real> squared_relu(BasicTensor<Real> x);

template <typename Real>
Real sigmoid(Real v);

/// a += b (shapes must match).
template <typename Real>
void add_inplace(BasicTensor<Real>& a, const BasicTensor<Real>& b);

/// a *= b elementwise (shapes must match).
template <typename Real>
void mul_inplace(BasicTensor<Real>& a, const BasicTensor<Real>& b);

/// Concatenates (C_i,H,W) maps or (C_i,T) sequences along the leading axis.
template <typename Real>
BasicTensor<Real> concat_channels(
    std::span<const BasicTensor<Real>* const> parts);

/// Channels [begin, end) of a channels-first tensor.
template <typename Real>
BasicTensor<Real> slice_channels(const BasicTensor<Real>& x, std::size_t begin,
                                 std::size_t end);

/// Edge-replicating pad of a (C,H,W) map to (C,H2,W2), H2 >= H, W2 >= W.
template <typename Real>
BasicTensor<Real> pad_replicate(const BasicTensor<Real>& x, std::size_t h2,
                                std::size_t w2);

/// Top-left (C,h,w) crop.
template <typename Real>
BasicTensor<Real> crop(const BasicTensor<Real>& x, std::size_t h,
                       std::size_t w);

}  // namespace lalic::ops
