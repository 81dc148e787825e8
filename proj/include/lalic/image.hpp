// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lalic/tensor.hpp"

namespace lalic {

/// 8-bit interleaved RGB.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb;  // height * width * 3

  friend bool operator==(const Image&, const Image&) = default;
};

/// Binary PPM (P6, maxval 255). Unreadable files -> kIo, malformed -> kFormat.
Image read_ppm(const std::string& path);
Image parse_ppm(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_ppm(const Image& image);
/// Writes to a temporary sibling and renames, so a failed write never leaves
/// a partial file at `path`.
void write_ppm(const std::string& path, const Image& image);

/// Whole-file helpers with the same atomicity.
std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);

/// (3,H,W) in [0,1].
template <typename Real>
BasicTensor<Real> image_to_tensor(const Image& image);
/// Clamps to [0,1] and rounds to the nearest 8-bit level.
template <typename Real>
Image tensor_to_image(const BasicTensor<Real>& x);

}  // namespace lalic
