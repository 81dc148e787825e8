// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lalic {

/// Architecture hyperparameters. Everything the weight manifest depends on
/// lives here, so alternative sizes never require code changes.
struct ModelConfig {
  std::array<std::uint32_t, 4> stage_blocks{2, 4, 6, 6};
  std::array<std::uint32_t, 3> stage_channels{96, 144, 256};
  std::uint32_t latent_channels = 320;  // M
  std::uint32_t hyper_channels = 192;   // N
  std::vector<std::uint32_t> chunk_plan{16, 16, 32, 64, 192};
  std::uint32_t hidden_ratio = 2;       // Channel-Mix expansion in blocks
  std::uint32_t transform_kernel = 5;   // g_a / g_s resampling convs
  std::uint32_t hyper_kernel = 3;       // h_a / h_s convs
  std::uint32_t hyper_blocks = 1;       // Bi-RWKV blocks per hyper stage
  std::array<std::uint32_t, 2> hyper_synthesis_channels{192, 320};
  std::uint32_t context_channels = 128;  // channel-context width
  std::uint32_t context_blocks = 2;      // Bi-RWKV blocks per channel context
  std::uint32_t aggregation_mixes = 2;   // Channel-Mix modules per aggregator
  std::uint32_t aggregation_ratio = 1;   // their hidden expansion

  /// Full-size defaults.
  static ModelConfig defaults() { return {}; }

  /// Width of (Φ_sp, Φ_ch, Φ_hp) concatenated for chunk `k`.
  std::uint32_t aggregation_width(std::size_t chunk) const {
    return 2 * chunk_plan.at(chunk) + context_channels + 2 * latent_channels;
  }

  /// All four g_a stage widths, ending at M.
  std::array<std::uint32_t, 4> transform_widths() const {
    return {stage_channels[0], stage_channels[1], stage_channels[2],
            latent_channels};
  }

  /// Throws kInvalidArgument on inconsistent settings (e.g. a chunk plan
  /// that does not sum to M).
  void validate() const;

  /// Fixed little-endian u32 encoding, the config block of both file
  /// formats.
  std::vector<std::uint8_t> serialize() const;
  static ModelConfig deserialize(std::span<const std::uint8_t> bytes);

  /// FNV-1a 64 of serialize().
  std::uint64_t digest() const;

  std::string to_json() const;
  /// Missing keys keep their default; unknown keys are rejected.
  static ModelConfig from_json(const std::string& text);
  static ModelConfig from_json_file(const std::string& path);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// {16,16,32,64,M-128}; requires M > 128.
std::vector<std::uint32_t> default_chunk_plan(std::uint32_t latent_channels);

}  // namespace lalic
