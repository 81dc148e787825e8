// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lalic/bitstream.hpp"

#include <string>

#include "lalic/bytes.hpp"
#include "lalic/error.hpp"

namespace lalic {
namespace {

constexpr char kMagic[4] = {'L', 'A', 'L', 'B'};
constexpr std::uint32_t kMaxUnits = 1u << 16;

}  // namespace

std::uint64_t BitstreamHeader::payload_size() const {
  std::uint64_t total = z_bytes;
  for (std::uint32_t b : unit_bytes) total += b;
  return total;
}

std::vector<std::uint8_t> serialize_bitstream(const Bitstream& stream) {
  const BitstreamHeader& h = stream.header;
  ByteWriter w;
  w.text(std::string_view(kMagic, 4));
  w.u32(h.version);
  w.u32(h.width);
  w.u32(h.height);
  w.u32(h.padded_width);
  w.u32(h.padded_height);
  w.u64(h.config_digest);
  w.u8(std::uint8_t(h.weight_source));
  w.u64(h.weight_id);
  w.u8(std::uint8_t(h.precision));
  w.u32(std::uint32_t(stream.units.size()));
  w.u32(std::uint32_t(stream.z.size()));
  for (const auto& u : stream.units) w.u32(std::uint32_t(u.size()));
  w.bytes(stream.z);
  for (const auto& u : stream.units) w.bytes(u);
  return w.take();
}

Bitstream parse_bitstream(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, ErrorKind::kCorruption, "bitstream");
  if (bytes.size() < 4 || r.text(4) != std::string_view(kMagic, 4)) {
    fail(ErrorKind::kFormat, "not a LALB bitstream (bad magic)");
  }
  Bitstream s;
  BitstreamHeader& h = s.header;
  h.version = r.u32();
  if (h.version != kBitstreamVersion) {
    fail(ErrorKind::kFormat, "unsupported bitstream version " + std::to_string(h.version));
  }
  h.width = r.u32();
  h.height = r.u32();
  h.padded_width = r.u32();
  h.padded_height = r.u32();
  h.config_digest = r.u64();
  const std::uint8_t source = r.u8();
  if (source > 1) fail(ErrorKind::kFormat, "unknown weight source tag");
  h.weight_source = WeightSource(source);
  h.weight_id = r.u64();
  const std::uint8_t precision = r.u8();
  if (precision > 1) fail(ErrorKind::kFormat, "unknown precision tag");
  h.precision = Precision(precision);
  const std::uint32_t units = r.u32();
  if (units == 0 || units > kMaxUnits) {
    fail(ErrorKind::kCorruption, "implausible coding-unit count");
  }
  if (h.width == 0 || h.height == 0 || h.padded_width % 64 != 0 ||
      h.padded_height % 64 != 0 || h.padded_width < h.width ||
      h.padded_height < h.height || h.padded_width - h.width >= 64 ||
      h.padded_height - h.height >= 64) {
    fail(ErrorKind::kCorruption, "inconsistent image extents in header");
  }
  h.z_bytes = r.u32();
  for (std::uint32_t i = 0; i < units; ++i) h.unit_bytes.push_back(r.u32());
  if (h.payload_size() != r.remaining()) {
    fail(ErrorKind::kCorruption,
         "payload is " + std::to_string(r.remaining()) + " bytes, header declares " +
             std::to_string(h.payload_size()));
  }
  auto seg = r.take(h.z_bytes);
  s.z.assign(seg.begin(), seg.end());
  for (std::uint32_t n : h.unit_bytes) {
    seg = r.take(n);
    s.units.emplace_back(seg.begin(), seg.end());
  }
  return s;
}

}  // namespace lalic
