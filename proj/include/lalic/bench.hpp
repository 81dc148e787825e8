// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lalic/config.hpp"
#include "lalic/wkv.hpp"

namespace lalic {

/// Attention operations of the analysis transform at an H x W input:
/// sum over stages of blocks * op_count(mechanism, T_stage, C_stage), where
/// stage s runs at (H/2^(s+1)) x (W/2^(s+1)) tokens.
std::uint64_t attention_ops(const ModelConfig& config, wkv::Mechanism mechanism,
                            std::size_t height, std::size_t width);

struct BenchRow {
  std::size_t resolution = 0;  // square side
  std::uint64_t pixels = 0;
  std::vector<std::uint64_t> ops;  // one per mechanism
  double scan_seconds = 0.0;       // BiWKV scans of every g_a block, 0 if untimed
};

struct BenchTable {
  std::vector<wkv::Mechanism> mechanisms;
  std::vector<BenchRow> rows;
  std::vector<double> r_squared;  // ops vs pixels, per mechanism
  double time_r_squared = 0.0;    // scan seconds vs pixels

  std::string format() const;
};

/// Resolutions must be positive multiples of 64.
BenchTable bench(const ModelConfig& config, std::span<const std::size_t> resolutions,
                 std::span<const wkv::Mechanism> mechanisms, bool time_scans);

/// Coefficient of determination of the least-squares line y ~ a + b x.
/// 1 when y is exactly linear in x (including constant y).
double r_squared(std::span<const double> x, std::span<const double> y);

}  // namespace lalic
