// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lalic/entropy_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lalic/error.hpp"
#include "lalic/ops.hpp"
#include "lalic/range_codec.hpp"
#include "lalic/transforms.hpp"

namespace lalic::entropy {

ChunkPlan::ChunkPlan(std::vector<std::uint32_t> counts) : counts_(std::move(counts)) {
  check_arg(!counts_.empty(), "chunk plan is empty");
  offsets_.push_back(0);
  for (std::uint32_t c : counts_) {
    check_arg(c >= 1, "chunk plan entries must be >= 1");
    offsets_.push_back(offsets_.back() + c);
  }
}

ChunkPlan ChunkPlan::for_latent(std::uint32_t latent_channels) {
  return ChunkPlan(default_chunk_plan(latent_channels));
}

std::vector<CodingUnit> coding_schedule(const ChunkPlan& plan) {
  std::vector<CodingUnit> units;
  for (std::size_t k = 0; k < plan.size(); ++k) {
    for (Part part : {Part::kAnchor, Part::kNonAnchor}) {
      units.push_back({k, part, plan.offset(k), plan.count(k)});
    }
  }
  return units;
}

std::vector<std::size_t> part_positions(std::size_t h, std::size_t w, Part part) {
  std::vector<std::size_t> out;
  out.reserve((h * w + 1) / 2);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      if (part_of(r, c) == part) out.push_back(r * w + c);
    }
  }
  return out;
}

template <typename Real>
std::pair<BasicTensor<Real>, BasicTensor<Real>> checkerboard_split(
    const BasicTensor<Real>& t) {
  check_arg(t.rank() == 3, "checkerboard_split: expected (C,H,W), got " +
                               to_string(t.shape()));
  BasicTensor<Real> anchors(t.shape()), non_anchors(t.shape());
  const std::size_t h = t.dim(1), w = t.dim(2);
  for (std::size_t c = 0; c < t.dim(0); ++c) {
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t x = 0; x < w; ++x) {
        const std::size_t i = (c * h + r) * w + x;
        (is_anchor(r, x) ? anchors : non_anchors)[i] = t[i];
      }
    }
  }
  return {std::move(anchors), std::move(non_anchors)};
}

template <typename Real>
BasicTensor<Real> checkerboard_merge(const BasicTensor<Real>& anchors,
                                     const BasicTensor<Real>& non_anchors) {
  check_arg(anchors.rank() == 3 && anchors.shape() == non_anchors.shape(),
            "checkerboard_merge: shapes " + to_string(anchors.shape()) + " and " +
                to_string(non_anchors.shape()) + " differ");
  BasicTensor<Real> out(anchors.shape());
  const std::size_t h = out.dim(1), w = out.dim(2);
  for (std::size_t c = 0; c < out.dim(0); ++c) {
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t x = 0; x < w; ++x) {
        const std::size_t i = (c * h + r) * w + x;
        out[i] = is_anchor(r, x) ? anchors[i] : non_anchors[i];
      }
    }
  }
  return out;
}

template <typename Real>
Real scale_from_log(Real log_scale) {
  const Real lo = Real(std::log(kScaleMin)), hi = Real(std::log(kScaleMax));
  // exp(ln x) need not give back x, so the bounds are returned directly.
  if (!(log_scale > lo)) return Real(kScaleMin);
  if (log_scale >= hi) return Real(kScaleMax);
  return std::clamp(std::exp(log_scale), Real(kScaleMin), Real(kScaleMax));
}

template <typename Real>
ShiftedQuantization<Real> quantize_shifted(const BasicTensor<Real>& y,
                                           const BasicTensor<Real>& mean) {
  check_arg(y.shape() == mean.shape(), "quantize_shifted: shapes " +
                                           to_string(y.shape()) + " and " +
                                           to_string(mean.shape()) + " differ");
  ShiftedQuantization<Real> q{std::vector<int>(y.size()), BasicTensor<Real>(y.shape())};
  constexpr Real kLimit = Real(1 << 30);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const Real r = std::round(y[i] - mean[i]);
    q.symbols[i] = int(std::clamp(r, -kLimit, kLimit));
    q.y_hat[i] = r + mean[i];
  }
  return q;
}

namespace {

template <typename Real>
BasicTensor<Real> zeros_like_grid(std::size_t c, std::size_t h, std::size_t w) {
  return BasicTensor<Real>({c, h, w});
}

// Rows of a (C,H,W) map at flat positions, appended to out (Ctot, n) at row
// offset `row`.
template <typename Real>
void gather_into(const BasicTensor<Real>& x, std::span<const std::size_t> positions,
                 BasicTensor<Real>& out, std::size_t row) {
  const std::size_t plane = x.dim(1) * x.dim(2), n = positions.size();
  for (std::size_t c = 0; c < x.dim(0); ++c) {
    const Real* src = x.data() + c * plane;
    Real* dst = out.data() + (row + c) * n;
    for (std::size_t i = 0; i < n; ++i) dst[i] = src[positions[i]];
  }
}

}  // namespace

template <typename Real>
EntropyModel<Real> EntropyModel<Real>::from_store(const WeightStore& store) {
  EntropyModel m;
  m.config_ = store.config();
  m.plan_ = ChunkPlan(m.config_.chunk_plan);
  check_arg(m.plan_.total() == m.config_.latent_channels,
            "chunk plan does not sum to the latent width");
  for (std::size_t k = 0; k < m.plan_.size(); ++k) {
    const std::string p = "entropy.chunk" + std::to_string(k);
    ChunkWeights<Real> cw;
    cw.spatial = tensor_as<Real>(store, p + ".spatial.weight");
    // Enforce the mask regardless of where the weights came from.
    const std::size_t k2 = kSpatialKernel * kSpatialKernel;
    for (std::size_t i = 0; i < cw.spatial.size(); ++i) {
      const std::size_t tap = i % k2;
      if (!spatial_context_tap(tap / kSpatialKernel, tap % kSpatialKernel,
                               kSpatialKernel)) {
        cw.spatial[i] = Real(0);
      }
    }
    if (k > 0) {
      cw.context_weight = tensor_as<Real>(store, p + ".context.proj.weight");
      cw.context_bias = vector_as<Real>(store, p + ".context.proj.bias");
      for (std::size_t b = 0; b < m.config_.context_blocks; ++b) {
        cw.context_blocks.push_back(
            load_block<Real>(store, p + ".context.block" + std::to_string(b)));
      }
    }
    for (std::size_t i = 0; i < m.config_.aggregation_mixes; ++i) {
      cw.mixes.push_back(load_channel_mix<Real>(
          store, p + ".aggregate.mix" + std::to_string(i), false));
    }
    for (std::size_t part = 0; part < 2; ++part) {
      const std::string h = p + ".aggregate.head" + std::to_string(part);
      cw.head_weight[part] = tensor_as<Real>(store, h + ".weight");
      cw.head_bias[part] = vector_as<Real>(store, h + ".bias");
    }
    m.chunks_.push_back(std::move(cw));
  }
  return m;
}

template <typename Real>
BasicTensor<Real> EntropyModel<Real>::spatial_context(
    std::size_t k, Part part, const BasicTensor<Real>& anchors) const {
  const std::size_t c = plan_.count(k);
  check_arg(anchors.rank() == 3 && anchors.dim(0) == c,
            "spatial_context: expected (" + std::to_string(c) + ",H,W), got " +
                to_string(anchors.shape()));
  if (part == Part::kAnchor) {
    return zeros_like_grid<Real>(2 * c, anchors.dim(1), anchors.dim(2));
  }
  return ops::conv2d<Real>(anchors, chunks_[k].spatial, {}, 1, kSpatialKernel / 2);
}

template <typename Real>
BasicTensor<Real> EntropyModel<Real>::channel_context(
    std::size_t k, std::span<const BasicTensor<Real>> decoded, std::size_t h,
    std::size_t w) const {
  check_arg(k < plan_.size(), "channel_context: chunk index out of range");
  check_arg(decoded.size() == k,
            "channel_context: chunk " + std::to_string(k) + " needs exactly " +
                std::to_string(k) + " decoded chunks, got " +
                std::to_string(decoded.size()));
  const std::size_t ctx = config_.context_channels;
  if (k == 0) return zeros_like_grid<Real>(ctx, h, w);
  std::vector<const BasicTensor<Real>*> parts;
  for (std::size_t j = 0; j < k; ++j) {
    check_arg(decoded[j].shape() == Shape{plan_.count(j), h, w},
              "channel_context: decoded chunk " + std::to_string(j) +
                  " has shape " + to_string(decoded[j].shape()));
    parts.push_back(&decoded[j]);
  }
  const ChunkWeights<Real>& cw = chunks_[k];
  BasicTensor<Real> seq = ops::concat_channels<Real>(parts).reshaped({plan_.offset(k), h * w});
  BasicTensor<Real> f = ops::linear<Real>(seq, cw.context_weight, cw.context_bias)
                            .reshaped({ctx, h, w});
  return run_blocks(std::move(f), cw.context_blocks);
}

template <typename Real>
GaussianParams<Real> EntropyModel<Real>::aggregate(
    std::size_t k, Part part, const BasicTensor<Real>& spatial,
    const BasicTensor<Real>& channel, const BasicTensor<Real>& hyper,
    std::span<const std::size_t> positions) const {
  const std::size_t c = plan_.count(k);
  check_arg(spatial.rank() == 3 && spatial.dim(0) == 2 * c,
            "aggregate: spatial context " + to_string(spatial.shape()));
  check_arg(channel.rank() == 3 && channel.dim(0) == config_.context_channels,
            "aggregate: channel context " + to_string(channel.shape()));
  check_arg(hyper.rank() == 3 && hyper.dim(0) == 2 * config_.latent_channels,
            "aggregate: hyper context " + to_string(hyper.shape()));
  const std::size_t h = spatial.dim(1), w = spatial.dim(2);
  check_arg(channel.dim(1) == h && channel.dim(2) == w && hyper.dim(1) == h &&
                hyper.dim(2) == w,
            "aggregate: contexts are not spatially aligned");
  for (std::size_t p : positions) check_arg(p < h * w, "aggregate: bad position");

  const std::size_t width = config_.aggregation_width(k), n = positions.size();
  BasicTensor<Real> x({width, n});
  gather_into(spatial, positions, x, 0);
  gather_into(channel, positions, x, 2 * c);
  gather_into(hyper, positions, x, 2 * c + config_.context_channels);

  const ChunkWeights<Real>& cw = chunks_[k];
  for (const auto& mix : cw.mixes) ops::add_inplace(x, block::channel_mix_tokens(x, mix));
  const std::size_t pi = std::size_t(part);
  BasicTensor<Real> head = ops::linear<Real>(x, cw.head_weight[pi], cw.head_bias[pi]);

  GaussianParams<Real> g{BasicTensor<Real>({c, n}), BasicTensor<Real>({c, n})};
  std::copy(head.data(), head.data() + c * n, g.mean.data());
  for (std::size_t i = 0; i < c * n; ++i) {
    g.scale[i] = scale_from_log(head[c * n + i]);
  }
  return g;
}

template <typename Real>
BasicTensor<Real> EntropyModel<Real>::run_schedule(
    Mode mode, const BasicTensor<Real>& y, const BasicTensor<Real>& hyper,
    const UnitCoder<Real>& coder) const {
  const std::size_t m = config_.latent_channels;
  check_arg(hyper.rank() == 3 && hyper.dim(0) == 2 * m,
            "run_schedule: hyper context " + to_string(hyper.shape()));
  const std::size_t h = hyper.dim(1), w = hyper.dim(2), plane = h * w;
  if (mode == Mode::kEncode) {
    check_arg(y.shape() == Shape{m, h, w},
              "run_schedule: latent " + to_string(y.shape()) +
                  " does not match the hyper context");
  }

  BasicTensor<Real> y_hat({m, h, w});
  std::vector<BasicTensor<Real>> decoded;
  const std::vector<CodingUnit> units = coding_schedule(plan_);
  BasicTensor<Real> channel, chunk_hat;
  for (const CodingUnit& unit : units) {
    const std::size_t k = unit.chunk, c = unit.channel_count;
    if (unit.part == Part::kAnchor) {
      channel = channel_context(k, decoded, h, w);
      chunk_hat = BasicTensor<Real>({c, h, w});
    }
    const std::vector<std::size_t> positions = part_positions(h, w, unit.part);
    const std::size_t n = positions.size();
    const BasicTensor<Real> spatial = spatial_context(k, unit.part, chunk_hat);
    const GaussianParams<Real> params = aggregate(k, unit.part, spatial, channel, hyper, positions);

    std::vector<int> symbols(c * n);
    if (mode == Mode::kEncode) {
      BasicTensor<Real> part_y({c, n});
      for (std::size_t ch = 0; ch < c; ++ch) {
        const Real* src = y.data() + (unit.channel_begin + ch) * plane;
        for (std::size_t i = 0; i < n; ++i) part_y[ch * n + i] = src[positions[i]];
      }
      symbols = quantize_shifted(part_y, params.mean).symbols;
      for (int& s : symbols) s = codec::clamp_symbol(s);
    }
    coder(unit, positions, params, symbols);

    for (std::size_t ch = 0; ch < c; ++ch) {
      Real* dst = chunk_hat.data() + ch * plane;
      for (std::size_t i = 0; i < n; ++i) {
        dst[positions[i]] = Real(symbols[ch * n + i]) + params.mean[ch * n + i];
      }
    }
    if (unit.part == Part::kNonAnchor) {
      std::copy(chunk_hat.data(), chunk_hat.data() + c * plane,
                y_hat.data() + unit.channel_begin * plane);
      decoded.push_back(std::move(chunk_hat));
    }
  }
  return y_hat;
}

#define LALIC_INSTANTIATE_ENTROPY(Real)                                       \
  template std::pair<BasicTensor<Real>, BasicTensor<Real>> checkerboard_split( \
      const BasicTensor<Real>&);                                              \
  template BasicTensor<Real> checkerboard_merge(const BasicTensor<Real>&,     \
                                                const BasicTensor<Real>&);    \
  template Real scale_from_log(Real);                                         \
  template ShiftedQuantization<Real> quantize_shifted(                        \
      const BasicTensor<Real>&, const BasicTensor<Real>&);                    \
  template class EntropyModel<Real>;

LALIC_INSTANTIATE_ENTROPY(float)
LALIC_INSTANTIATE_ENTROPY(double)

#undef LALIC_INSTANTIATE_ENTROPY

}  // namespace lalic::entropy
