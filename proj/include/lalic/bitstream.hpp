// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace lalic {

inline constexpr std::uint32_t kBitstreamVersion = 1;

enum class WeightSource : std::uint8_t { kSeed = 0, kFile = 1 };
enum class Precision : std::uint8_t { kF32 = 0, kF64 = 1 };

// Little-endian layout:
//   "LALB" | u32 version | u32 width | u32 height | u32 padded_width |
//   u32 padded_height | u64 config digest | u8 weight source |
//   u64 seed or weight-file checksum | u8 precision | u32 unit count |
//   u32 z length | u32 unit lengths[unit count] |
//   z segment | unit segments in schedule order
// Each segment is an independent range-coder stream.
struct BitstreamHeader {
  std::uint32_t version = kBitstreamVersion;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t padded_width = 0;
  std::uint32_t padded_height = 0;
  std::uint64_t config_digest = 0;
  WeightSource weight_source = WeightSource::kSeed;
  std::uint64_t weight_id = 0;
  Precision precision = Precision::kF32;
  std::uint32_t z_bytes = 0;
  std::vector<std::uint32_t> unit_bytes;

  std::size_t encoded_size() const { return 50 + 4 * unit_bytes.size(); }
  std::uint64_t payload_size() const;

  friend bool operator==(const BitstreamHeader&, const BitstreamHeader&) = default;
};

struct Bitstream {
  BitstreamHeader header;
  std::vector<std::uint8_t> z;
  std::vector<std::vector<std::uint8_t>> units;
};

/// Fills in the segment lengths from the payloads.
std::vector<std::uint8_t> serialize_bitstream(const Bitstream& stream);

/// Bad magic / version / enum values -> kFormat; truncated or oversized
/// payload, inconsistent extents -> kCorruption.
Bitstream parse_bitstream(std::span<const std::uint8_t> bytes);

}  // namespace lalic
