// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "lalic/bitstream.hpp"
#include "lalic/image.hpp"
#include "lalic/tensor.hpp"
#include "lalic/weights.hpp"

namespace lalic {

/// Lagrange multipliers for the six quality levels.
inline constexpr std::array<double, 6> kLambdaPresets{0.0025, 0.0035, 0.0067,
                                                      0.0130, 0.0250, 0.0483};

/// PSNR of identical images.
inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

struct RdReport {
  double bpp = 0.0;              // 8 * payload bytes / original pixels
  double psnr = 0.0;             // dB over RGB in [0,255]
  double mse = 0.0;              // on [0,255]
  double estimated_bits = 0.0;   // z + y, ideal code length
  double actual_bits = 0.0;      // z + y segments as written
  double lambda = 0.0;
  double loss = 0.0;             // lambda * 255^2 * MSE([0,1]) + bits
};

/// Distortion terms and loss; `bits` is the rate term of the loss.
RdReport eval_rd(const Image& original, const Image& reconstruction,
                 double bits, double lambda);

struct CompressResult {
  std::vector<std::uint8_t> bytes;
  BitstreamHeader header;
  TensorD y;          // unquantized latent
  TensorD y_hat;      // encoder-side quantized latent
  Image reconstruction;
  double estimated_z_bits = 0.0;
  double estimated_y_bits = 0.0;
  std::size_t symbol_count = 0;
};

struct DecompressResult {
  Image image;
  TensorD y_hat;
  BitstreamHeader header;
};

/// Loaded model plus the compress/decompress pipeline. float by default,
/// double with Precision::kF64.
class Codec {
 public:
  Codec(WeightStore store, Precision precision = Precision::kF32);
  ~Codec();
  Codec(Codec&&) noexcept;
  Codec& operator=(Codec&&) noexcept;

  const WeightStore& weights() const;
  Precision precision() const;

  /// pad -> g_a -> h_a -> Q(z) -> code z -> h_s -> schedule -> stream.
  /// The reconstruction is only computed when `reconstruct` is set.
  CompressResult compress(const Image& image, bool reconstruct = true) const;

  /// Header checks (config digest, weight source, precision) raise
  /// kConfigMismatch; malformed payloads raise kCorruption/kFormat.
  DecompressResult decompress(std::span<const std::uint8_t> bytes) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Smallest multiple of 64 >= n.
constexpr std::size_t padded_extent(std::size_t n) { return (n + 63) / 64 * 64; }

}  // namespace lalic
