// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lalic/transforms.hpp"

#include <algorithm>
#include <string>

#include "lalic/ops.hpp"

namespace lalic {
namespace {

template <typename Real>
std::vector<block::BlockParams<Real>> load_blocks(const WeightStore& store,
                                                  const std::string& prefix,
                                                  std::size_t count) {
  std::vector<block::BlockParams<Real>> out;
  out.reserve(count);
  for (std::size_t b = 0; b < count; ++b) {
    out.push_back(load_block<Real>(store, prefix + ".block" + std::to_string(b)));
  }
  return out;
}

template <typename Real>
void expect_channels(const BasicTensor<Real>& x, std::size_t c, const char* op) {
  check_arg(x.rank() == 3 && x.dim(0) == c,
            std::string(op) + ": expected (" + std::to_string(c) +
                ",H,W) input, got " + to_string(x.shape()));
}

}  // namespace

template <typename Real>
BasicTensor<Real> ConvLayer<Real>::operator()(const BasicTensor<Real>& x) const {
  const std::size_t k = weight.dim(2), pad = k / 2;
  if (transposed) {
    return ops::deconv2d<Real>(x, weight, bias, stride, pad, stride - 1);
  }
  return ops::conv2d<Real>(x, weight, bias, stride, pad);
}

template <typename Real>
ConvLayer<Real> ConvLayer<Real>::load(const WeightStore& store,
                                      const std::string& prefix,
                                      std::size_t stride, bool transposed) {
  return {tensor_as<Real>(store, prefix + ".weight"),
          vector_as<Real>(store, prefix + ".bias"), stride, transposed};
}

template <typename Real>
BasicTensor<Real> run_blocks(BasicTensor<Real> f,
                             const std::vector<block::BlockParams<Real>>& blocks) {
  for (const auto& b : blocks) f = block::birwkv_block(f, b);
  return f;
}

template <typename Real>
Transforms<Real> Transforms<Real>::from_store(const WeightStore& store) {
  Transforms t;
  t.config_ = store.config();
  const ModelConfig& c = t.config_;
  for (std::size_t s = 0; s < 4; ++s) {
    const std::string p = "g_a.stage" + std::to_string(s);
    t.analysis_.push_back({ConvLayer<Real>::load(store, p + ".down", 2, false),
                           load_blocks<Real>(store, p, c.stage_blocks[s])});
  }
  for (std::size_t s = 0; s < 4; ++s) {
    const std::string p = "g_s.stage" + std::to_string(s);
    t.synthesis_.push_back({ConvLayer<Real>::load(store, p + ".up", 2, true),
                            load_blocks<Real>(store, p, c.stage_blocks[3 - s])});
  }
  t.hyper_analysis_.push_back({ConvLayer<Real>::load(store, "h_a.conv0", 1, false),
                               load_blocks<Real>(store, "h_a.stage0", c.hyper_blocks)});
  t.hyper_analysis_.push_back({ConvLayer<Real>::load(store, "h_a.conv1", 2, false),
                               load_blocks<Real>(store, "h_a.stage1", c.hyper_blocks)});
  t.hyper_analysis_.push_back({ConvLayer<Real>::load(store, "h_a.conv2", 2, false), {}});
  t.hyper_synthesis_.push_back({ConvLayer<Real>::load(store, "h_s.up0", 2, true),
                                load_blocks<Real>(store, "h_s.stage0", c.hyper_blocks)});
  t.hyper_synthesis_.push_back({ConvLayer<Real>::load(store, "h_s.up1", 2, true),
                                load_blocks<Real>(store, "h_s.stage1", c.hyper_blocks)});
  t.hyper_synthesis_.push_back({ConvLayer<Real>::load(store, "h_s.conv2", 1, false), {}});
  return t;
}

template <typename Real>
BasicTensor<Real> Transforms<Real>::analysis(const BasicTensor<Real>& x) const {
  expect_channels(x, 3, "analysis");
  check_arg(x.dim(1) % 64 == 0 && x.dim(2) % 64 == 0 && x.dim(1) > 0 &&
                x.dim(2) > 0,
            "analysis: extents " + to_string(x.shape()) +
                " must be positive multiples of 64 (pad first)");
  BasicTensor<Real> f = x;
  for (const auto& stage : analysis_) f = run_blocks(stage.resample(f), stage.blocks);
  return f;
}

template <typename Real>
BasicTensor<Real> Transforms<Real>::synthesis(const BasicTensor<Real>& y_hat) const {
  expect_channels(y_hat, config_.latent_channels, "synthesis");
  BasicTensor<Real> f = y_hat;
  for (const auto& stage : synthesis_) f = stage.resample(run_blocks(std::move(f), stage.blocks));
  for (Real& v : f.values()) v = std::clamp(v, Real(0), Real(1));
  return f;
}

template <typename Real>
BasicTensor<Real> Transforms<Real>::hyper_analysis(const BasicTensor<Real>& y) const {
  expect_channels(y, config_.latent_channels, "hyper_analysis");
  check_arg(y.dim(1) % 4 == 0 && y.dim(2) % 4 == 0 && y.dim(1) > 0 && y.dim(2) > 0,
            "hyper_analysis: extents " + to_string(y.shape()) +
                " must be positive multiples of 4");
  BasicTensor<Real> f = y;
  for (const auto& stage : hyper_analysis_) f = run_blocks(stage.resample(f), stage.blocks);
  return f;
}

template <typename Real>
BasicTensor<Real> Transforms<Real>::hyper_synthesis(const BasicTensor<Real>& z_hat) const {
  expect_channels(z_hat, config_.hyper_channels, "hyper_synthesis");
  BasicTensor<Real> f = z_hat;
  for (const auto& stage : hyper_synthesis_) f = run_blocks(stage.resample(f), stage.blocks);
  return f;
}

template struct ConvLayer<float>;
template struct ConvLayer<double>;
template class Transforms<float>;
template class Transforms<double>;
template BasicTensor<float> run_blocks(BasicTensor<float>,
                                       const std::vector<block::BlockParams<float>>&);
template BasicTensor<double> run_blocks(BasicTensor<double>,
                                        const std::vector<block::BlockParams<double>>&);

}  // namespace lalic
