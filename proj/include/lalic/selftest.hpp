// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lalic/config.hpp"
#include "lalic/image.hpp"
#include "lalic/weights.hpp"

namespace lalic {

/// A small configuration (M = 24, four thin stages) for fast end-to-end
/// checks. Same architecture, narrower.
ModelConfig tiny_config();

/// Smooth deterministic RGB test pattern with some texture.
Image test_image(std::size_t width, std::size_t height, std::uint64_t seed);

struct CheckResult {
  bool passed = false;
  std::string detail;
};

/// Runs the entropy model schedule on random latents and, for every
/// CodingUnit, perturbs that unit's latents and confirms (μ,σ) of it and of
/// every earlier unit are bit-identical. Also checks the anchor-pass
/// spatial context is exactly zero.
CheckResult probe_schedule_causality(const WeightStore& store, std::size_t height,
                                     std::size_t width, std::uint64_t seed);

/// Max normwise relative error of biwkv_scan vs biwkv_reference over
/// `instances` random problems (the scan in Real, the reference in double).
template <typename Real>
double kernel_equivalence_error(std::size_t instances, std::uint64_t seed);

/// Max relative error of biwkv_backward vs central differences (h = 1e-5).
double gradient_check_error(std::size_t instances, std::uint64_t seed);

/// Max |merged - branch-sum| for random Omni-Shift branches, both sides
/// evaluated in Real.
template <typename Real>
double reparam_error(std::size_t instances, std::uint64_t seed);

/// Mismatched symbols of a random round trip (throws are reported as
/// failures by the caller). With `corrupt`, one payload byte is flipped
/// before decoding.
std::size_t codec_round_trip_mismatches(std::size_t symbols, std::uint64_t seed,
                                        bool corrupt);

struct SelftestOptions {
  bool f64 = false;
  bool corrupt_symbols = false;
  std::uint64_t seed = 0;
};

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

std::vector<SuiteResult> selftest(const SelftestOptions& options);

}  // namespace lalic
