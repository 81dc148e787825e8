// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "lalic/tensor.hpp"

// Key/value attention kernels over (C,T) sequences (channel-major, see
// tensor.hpp). Channels never interact, so every kernel is a loop over
// independent per-channel problems.
//
// Bidirectional WKV for token t of one channel, with decay w and bonus u:
//
//   wkv_t = (sum_{i!=t} e^{-(|t-i|-1)/T*w + k_i} v_i + e^{u+k_t} v_t)
//         / (sum_{i!=t} e^{-(|t-i|-1)/T*w + k_i}     + e^{u+k_t})
//
// Distance-1 neighbours are undecayed and the decay rate is normalized by
// the sequence length T.

namespace lalic::wkv {

template <typename Real>
struct AttentionParams {
  std::vector<Real> decay;  // w, one per channel
  std::vector<Real> bonus;  // u, one per channel
};

template <typename Real>
struct BiwkvGradients {
  BasicTensor<Real> d_key;
  BasicTensor<Real> d_value;
  std::vector<Real> d_decay;
  std::vector<Real> d_bonus;
};

/// Position-independent softmax(K)-weighted mean of V, max-shifted per
/// channel. Every token of the output carries the same value.
template <typename Real>
BasicTensor<Real> aft_reference(const BasicTensor<Real>& key,
                                const BasicTensor<Real>& value);

/// Direct O(T^2) evaluation of the bidirectional WKV. Ground truth for the
/// scan; exponents are max-shifted per output token.
template <typename Real>
BasicTensor<Real> biwkv_reference(const BasicTensor<Real>& key,
                                  const BasicTensor<Real>& value,
                                  const AttentionParams<Real>& params);

/// O(T*C) bidirectional WKV.
///
/// Splits every sum into a left part (i < t), a right part (i > t) and the
/// current token. The left part equals e^{-(t-1)d} * sum_{i<t} e^{k_i + i d} v_i
/// with d = w/T, so a forward running sum over the anchored exponents
/// g_i = k_i + i*d carries it; the right part mirrors this with
/// h_i = k_i - i*d on a backward pass. Each running sum is stored relative
/// to its running maximum exponent, so no exponential ever exceeds 1 and
/// no exponent is built by repeated accumulation.
template <typename Real>
BasicTensor<Real> biwkv_scan(const BasicTensor<Real>& key,
                             const BasicTensor<Real>& value,
                             const AttentionParams<Real>& params);

/// Exact gradients of sum(grad_out * biwkv(K, V; w, u)). dw and du are
/// summed over tokens per channel. O(T^2) per channel; meant for gradient
/// checks, not for training.
template <typename Real>
BiwkvGradients<Real> biwkv_backward(const BasicTensor<Real>& key,
                                    const BasicTensor<Real>& value,
                                    const AttentionParams<Real>& params,
                                    const BasicTensor<Real>& grad_out);

// --- operation-count models ------------------------------------------------

enum class Mechanism {
  kAft,
  kAftShift,
  kBiwkvShift,
  kWindowAttention,  // window 8
  kSelectiveScan,    // state 16
  kSelectiveScan2D,  // four scans, state 16
};

inline constexpr Mechanism kAllMechanisms[] = {
    Mechanism::kAft,           Mechanism::kAftShift,
    Mechanism::kBiwkvShift,    Mechanism::kWindowAttention,
    Mechanism::kSelectiveScan, Mechanism::kSelectiveScan2D};

/// Operations per token per channel.
std::uint64_t op_coefficient(Mechanism mechanism);

/// coefficient * L * D for a sequence of length L and width D.
std::uint64_t op_count(Mechanism mechanism, std::uint64_t length,
                       std::uint64_t width);

std::string_view to_string(Mechanism mechanism);

/// Accepts the names printed by to_string ("AFT", "AFT+Shift",
/// "BiWKV+Shift", "WindowAttention", "SelectiveScan", "SelectiveScan2D").
/// Unknown names are rejected.
Mechanism parse_mechanism(std::string_view name);

}  // namespace lalic::wkv
