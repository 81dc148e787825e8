// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

namespace lalic {

/// Coding parts of each channel chunk. Anchors are coded first.
enum class Part { kAnchor = 0, kNonAnchor = 1 };

/// Anchor parity: (row + col) even.
constexpr bool is_anchor(std::size_t row, std::size_t col) {
  return (row + col) % 2 == 0;
}

constexpr Part part_of(std::size_t row, std::size_t col) {
  return is_anchor(row, col) ? Part::kAnchor : Part::kNonAnchor;
}

/// True when tap (ky,kx) of a k x k kernel centred on a non-anchor site
/// reads an anchor site, i.e. the tap offset has odd parity.
constexpr bool spatial_context_tap(std::size_t ky, std::size_t kx,
                                   std::size_t k) {
  const std::size_t c = k / 2;
  const std::size_t dy = ky > c ? ky - c : c - ky;
  const std::size_t dx = kx > c ? kx - c : c - kx;
  return (dy + dx) % 2 == 1;
}

}  // namespace lalic
