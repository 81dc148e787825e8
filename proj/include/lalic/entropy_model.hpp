// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "lalic/birwkv.hpp"
#include "lalic/checkerboard.hpp"
#include "lalic/config.hpp"
#include "lalic/tensor.hpp"
#include "lalic/weights.hpp"

namespace lalic::entropy {

inline constexpr double kScaleMin = 0.04;
inline constexpr double kScaleMax = 256.0;
inline constexpr std::size_t kSpatialKernel = 5;

/// Channel counts per chunk, in coding order.
class ChunkPlan {
 public:
  explicit ChunkPlan(std::vector<std::uint32_t> counts);
  /// {16,16,32,64,M-128}.
  static ChunkPlan for_latent(std::uint32_t latent_channels);

  std::size_t size() const { return counts_.size(); }
  std::uint32_t count(std::size_t k) const { return counts_.at(k); }
  /// First channel of chunk k.
  std::uint32_t offset(std::size_t k) const { return offsets_.at(k); }
  std::uint32_t total() const { return offsets_.back(); }
  const std::vector<std::uint32_t>& counts() const { return counts_; }

  friend bool operator==(const ChunkPlan& a, const ChunkPlan& b) {
    return a.counts_ == b.counts_;
  }

 private:
  std::vector<std::uint32_t> counts_;
  std::vector<std::uint32_t> offsets_;  // size() + 1 entries
};

/// One (chunk, part) slice of ŷ. Chunks are 0-based here.
struct CodingUnit {
  std::size_t chunk = 0;
  Part part = Part::kAnchor;
  std::size_t channel_begin = 0;
  std::size_t channel_count = 0;

  friend bool operator==(const CodingUnit&, const CodingUnit&) = default;
};

/// (0,anchor), (0,non-anchor), (1,anchor), ...
std::vector<CodingUnit> coding_schedule(const ChunkPlan& plan);

/// Raster-order flat indices (r*w + c) of the positions in `part`.
std::vector<std::size_t> part_positions(std::size_t h, std::size_t w, Part part);

/// Masked copies: the anchor view has non-anchor positions zeroed and vice
/// versa. Works on (C,H,W).
template <typename Real>
std::pair<BasicTensor<Real>, BasicTensor<Real>> checkerboard_split(
    const BasicTensor<Real>& t);

/// Takes anchor positions from `anchors`, the rest from `non_anchors`.
template <typename Real>
BasicTensor<Real> checkerboard_merge(const BasicTensor<Real>& anchors,
                                     const BasicTensor<Real>& non_anchors);

/// Per-element Gaussian parameters, (c, n) over a unit's positions or
/// (c, h, w) over a full grid.
template <typename Real>
struct GaussianParams {
  BasicTensor<Real> mean;
  BasicTensor<Real> scale;
};

/// σ = exp(clamp(log_scale, ln 0.04, ln 256)).
template <typename Real>
Real scale_from_log(Real log_scale);

/// Symbols round(y - μ) (half away from zero) and ŷ = symbol + μ.
template <typename Real>
struct ShiftedQuantization {
  std::vector<int> symbols;
  BasicTensor<Real> y_hat;
};

template <typename Real>
ShiftedQuantization<Real> quantize_shifted(const BasicTensor<Real>& y,
                                           const BasicTensor<Real>& mean);

template <typename Real>
struct ChunkWeights {
  BasicTensor<Real> spatial;            // (2c, c, 5, 5), checkerboard-masked
  BasicTensor<Real> context_weight;     // (ctx, decoded); empty for chunk 0
  std::vector<Real> context_bias;
  std::vector<block::BlockParams<Real>> context_blocks;
  std::vector<block::ChannelMixParams<Real>> mixes;  // shift-free
  std::array<BasicTensor<Real>, 2> head_weight;     // per part, (2c, agg)
  std::array<std::vector<Real>, 2> head_bias;
};

/// Called once per CodingUnit. `params` are (c, n) over `positions`;
/// `symbols` has c*n entries, channel-major. In encode mode the symbols are
/// already filled in and the callback codes them; in decode mode the
/// callback fills them in.
template <typename Real>
using UnitCoder = std::function<void(const CodingUnit& unit,
                                     std::span<const std::size_t> positions,
                                     const GaussianParams<Real>& params,
                                     std::span<int> symbols)>;

enum class Mode { kEncode, kDecode };

/// RWKV-SCCTX: checkerboard spatial context, Bi-RWKV channel context and a
/// 1x1 aggregator per chunk.
template <typename Real>
class EntropyModel {
 public:
  static EntropyModel from_store(const WeightStore& store);

  const ChunkPlan& plan() const { return plan_; }
  const ModelConfig& config() const { return config_; }
  const ChunkWeights<Real>& chunk(std::size_t k) const { return chunks_.at(k); }

  /// Masked 5x5 conv of the decoded anchors of chunk k, (c,h,w) -> (2c,h,w).
  /// Zero for the anchor part.
  BasicTensor<Real> spatial_context(std::size_t k, Part part,
                                    const BasicTensor<Real>& anchors) const;

  /// Context from chunks 0..k-1 (exactly k tensors): concat -> 1x1 proj ->
  /// Bi-RWKV blocks, (ctx,h,w). Zero for k = 0.
  BasicTensor<Real> channel_context(
      std::size_t k, std::span<const BasicTensor<Real>> decoded,
      std::size_t h, std::size_t w) const;

  /// Location-wise fusion at `positions` only: the three contexts are
  /// gathered to (width, n) and run through the Channel-Mix trunk and the
  /// part's head. Returns (c, n) means and clamped scales.
  GaussianParams<Real> aggregate(std::size_t k, Part part,
                                 const BasicTensor<Real>& spatial,
                                 const BasicTensor<Real>& channel,
                                 const BasicTensor<Real>& hyper,
                                 std::span<const std::size_t> positions) const;

  /// Runs every CodingUnit in order. `hyper` is Φ_hp (2M,h,w). In encode
  /// mode `y` is the (M,h,w) latent; in decode mode it is ignored (pass an
  /// empty tensor) and extents come from `hyper`. Returns ŷ.
  BasicTensor<Real> run_schedule(Mode mode, const BasicTensor<Real>& y,
                                 const BasicTensor<Real>& hyper,
                                 const UnitCoder<Real>& coder) const;

 private:
  ModelConfig config_{};
  ChunkPlan plan_{{1}};
  std::vector<ChunkWeights<Real>> chunks_;
};

}  // namespace lalic::entropy
