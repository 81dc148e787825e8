// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lalic/birwkv.hpp"
#include "lalic/config.hpp"
#include "lalic/tensor.hpp"

namespace lalic {

enum class InitRule {
  kConv,              // conv / deconv / projection kernels, std 1/sqrt(fan_in)
  kBias,              // std 0.01
  kOnes,
  kZeros,
  kOutputProjection,  // std 0.01/sqrt(fan_in)
  kDecay,             // U[-1, 5]
  kBonus,             // U[-1, 1]
  kShift,             // random Omni-Shift branches, merged
  kSpatialContext,    // kConv with the checkerboard mask applied
  kHead,              // std 0.1/sqrt(fan_in)
  kPriorMean,         // std 0.1
  kPriorLogScale,     // U[-0.5, 0.5]
};

struct ParamSpec {
  std::string name;
  Shape shape;
  InitRule rule;
  std::size_t fan_in = 1;
};

/// Every parameter the configured architecture requires, in canonical
/// (serialization) order.
std::vector<ParamSpec> parameter_manifest(const ModelConfig& config);

std::uint64_t parameter_count(const ModelConfig& config);

/// Named float32 parameters plus provenance.
class WeightStore {
 public:
  explicit WeightStore(ModelConfig config) : config_(std::move(config)) {}

  const ModelConfig& config() const { return config_; }

  /// Seed used by init_weights, if synthetic.
  const std::optional<std::uint64_t>& seed() const { return seed_; }
  void set_seed(std::optional<std::uint64_t> seed) { seed_ = seed; }

  /// Trailing checksum of the file the store was loaded from, if any.
  const std::optional<std::uint64_t>& file_checksum() const {
    return file_checksum_;
  }
  void set_file_checksum(std::optional<std::uint64_t> c) { file_checksum_ = c; }

  void insert(std::string name, Tensor tensor);
  bool contains(std::string_view name) const;
  /// Throws kConfigMismatch naming the missing tensor.
  const Tensor& get(std::string_view name) const;
  Tensor& get_mutable(std::string_view name);

  const std::vector<std::pair<std::string, Tensor>>& entries() const {
    return entries_;
  }
  std::vector<std::pair<std::string, Tensor>>& entries() { return entries_; }

  std::uint64_t parameter_count() const;

  /// Checks names and shapes against parameter_manifest(config()): missing,
  /// extra or misshapen tensors raise kConfigMismatch with the tensor name.
  void validate() const;

 private:
  ModelConfig config_;
  std::optional<std::uint64_t> seed_;
  std::optional<std::uint64_t> file_checksum_;
  std::vector<std::pair<std::string, Tensor>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Deterministic synthetic weights (mt19937_64 + explicit uniform draws,
/// parameters in manifest order). Same (config, seed) gives bit-identical
/// stores on every IEEE-754 platform.
WeightStore init_weights(const ModelConfig& config, std::uint64_t seed);

// Weight file, little-endian:
//   "LALW" | u32 version | u32 config length | config block |
//   u8 has_seed | u64 seed | u32 tensor count |
//   { u32 name length | name | u8 rank | u32 extents[rank] | f32 values } |
//   u64 FNV-1a 64 of every preceding byte
inline constexpr std::uint32_t kWeightFormatVersion = 1;

/// Returns the checksum written at the end.
std::uint64_t write_weights(const WeightStore& store, std::ostream& out);
void save_weights(const WeightStore& store, const std::string& path);

/// Bad magic / unknown version -> kFormat; truncation or checksum mismatch
/// -> kCorruption; missing, extra or misshapen tensors (or a config other
/// than `expected`) -> kConfigMismatch.
WeightStore read_weights(std::istream& in,
                         const ModelConfig* expected = nullptr);
WeightStore load_weights(const std::string& path,
                         const ModelConfig* expected = nullptr);

// --- typed views --------------------------------------------------------

template <typename Real>
BasicTensor<Real> tensor_as(const WeightStore& store, std::string_view name) {
  return store.get(name).cast<Real>();
}

template <typename Real>
std::vector<Real> vector_as(const WeightStore& store, std::string_view name) {
  const Tensor& t = store.get(name);
  return std::vector<Real>(t.values().begin(), t.values().end());
}

template <typename Real>
block::LayerNormParams<Real> load_norm(const WeightStore& store,
                                       const std::string& prefix) {
  return {vector_as<Real>(store, prefix + ".gamma"),
          vector_as<Real>(store, prefix + ".beta")};
}

template <typename Real>
block::ChannelMixParams<Real> load_channel_mix(const WeightStore& store,
                                               const std::string& prefix,
                                               bool with_shift) {
  block::ChannelMixParams<Real> p;
  p.norm = load_norm<Real>(store, prefix + ".norm");
  if (with_shift) p.shift = tensor_as<Real>(store, prefix + ".shift");
  p.receptance = tensor_as<Real>(store, prefix + ".receptance");
  p.key = tensor_as<Real>(store, prefix + ".key");
  p.value = tensor_as<Real>(store, prefix + ".value");
  return p;
}

template <typename Real>
block::BlockParams<Real> load_block(const WeightStore& store,
                                    const std::string& prefix) {
  block::BlockParams<Real> b;
  const std::string s = prefix + ".spatial";
  b.spatial.norm = load_norm<Real>(store, s + ".norm");
  b.spatial.shift = tensor_as<Real>(store, s + ".shift");
  b.spatial.receptance = tensor_as<Real>(store, s + ".receptance");
  b.spatial.key = tensor_as<Real>(store, s + ".key");
  b.spatial.value = tensor_as<Real>(store, s + ".value");
  b.spatial.attention.decay = vector_as<Real>(store, s + ".decay");
  b.spatial.attention.bonus = vector_as<Real>(store, s + ".bonus");
  b.spatial.output = tensor_as<Real>(store, s + ".output");
  b.channel = load_channel_mix<Real>(store, prefix + ".channel", true);
  return b;
}

}  // namespace lalic
