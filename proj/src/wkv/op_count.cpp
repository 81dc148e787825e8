// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#include <string>

#include "lalic/error.hpp"
#include "lalic/wkv.hpp"

namespace lalic::wkv {

std::uint64_t op_coefficient(Mechanism mechanism) {
  constexpr std::uint64_t kShift = 2 * 25;  // 5x5 depthwise in both mixes
  constexpr std::uint64_t kWindow = 8, kState = 16;
  switch (mechanism) {
    case Mechanism::kAft: return 7;
    case Mechanism::kAftShift: return 7 + kShift;
    case Mechanism::kBiwkvShift: return 29 + kShift;
    case Mechanism::kWindowAttention: return 2 * kWindow * kWindow;
    case Mechanism::kSelectiveScan: return 9 * kState;
    case Mechanism::kSelectiveScan2D: return 4 * 9 * kState;
  }
  fail(ErrorKind::kInvalidArgument,
       "unknown attention mechanism id " +
           std::to_string(static_cast<int>(mechanism)));
}

std::uint64_t op_count(Mechanism mechanism, std::uint64_t length,
                       std::uint64_t width) {
  check_arg(length >= 1 && width >= 1, "op_count: L and D must be >= 1");
  return op_coefficient(mechanism) * length * width;
}

std::string_view to_string(Mechanism mechanism) {
  switch (mechanism) {
    case Mechanism::kAft: return "AFT";
    case Mechanism::kAftShift: return "AFT+Shift";
    case Mechanism::kBiwkvShift: return "BiWKV+Shift";
    case Mechanism::kWindowAttention: return "WindowAttention";
    case Mechanism::kSelectiveScan: return "SelectiveScan";
    case Mechanism::kSelectiveScan2D: return "SelectiveScan2D";
  }
  return "unknown";
}

Mechanism parse_mechanism(std::string_view name) {
  for (Mechanism m : kAllMechanisms) {
    if (to_string(m) == name) return m;
  }
  fail(ErrorKind::kInvalidArgument,
       "unknown attention mechanism '" + std::string(name) + "'");
}

}  // namespace lalic::wkv
