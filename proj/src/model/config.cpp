// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lalic/config.hpp"

#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "lalic/bytes.hpp"
#include "lalic/error.hpp"

namespace lalic {

std::vector<std::uint32_t> default_chunk_plan(std::uint32_t latent_channels) {
  check_arg(latent_channels > 128,
            "default chunk plan {16,16,32,64,M-128} needs M > 128, got M=" +
                std::to_string(latent_channels));
  return {16, 16, 32, 64, latent_channels - 128};
}

void ModelConfig::validate() const {
  for (auto c : stage_channels) check_arg(c >= 1, "stage channels must be >= 1");
  check_arg(latent_channels >= 1 && hyper_channels >= 1,
            "latent/hyper channels must be >= 1");
  check_arg(!chunk_plan.empty(), "chunk plan must not be empty");
  for (auto c : chunk_plan) check_arg(c >= 1, "every chunk needs >= 1 channel");
  const std::uint64_t sum =
      std::accumulate(chunk_plan.begin(), chunk_plan.end(), std::uint64_t{0});
  check_arg(sum == latent_channels,
            "chunk plan sums to " + std::to_string(sum) + ", expected M=" +
                std::to_string(latent_channels));
  check_arg(hidden_ratio >= 1 && aggregation_ratio >= 1,
            "hidden ratios must be >= 1");
  check_arg(transform_kernel % 2 == 1 && transform_kernel >= 3,
            "transform kernel must be odd and >= 3");
  check_arg(hyper_kernel % 2 == 1 && hyper_kernel >= 3,
            "hyper kernel must be odd and >= 3");
  check_arg(hyper_synthesis_channels[0] >= 1 && hyper_synthesis_channels[1] >= 1,
            "hyper synthesis channels must be >= 1");
  check_arg(context_channels >= 1, "context channels must be >= 1");
}

std::vector<std::uint8_t> ModelConfig::serialize() const {
  ByteWriter w;
  for (auto v : stage_blocks) w.u32(v);
  for (auto v : stage_channels) w.u32(v);
  w.u32(latent_channels);
  w.u32(hyper_channels);
  w.u32(std::uint32_t(chunk_plan.size()));
  for (auto v : chunk_plan) w.u32(v);
  w.u32(hidden_ratio);
  w.u32(transform_kernel);
  w.u32(hyper_kernel);
  w.u32(hyper_blocks);
  for (auto v : hyper_synthesis_channels) w.u32(v);
  w.u32(context_channels);
  w.u32(context_blocks);
  w.u32(aggregation_mixes);
  w.u32(aggregation_ratio);
  return w.take();
}

ModelConfig ModelConfig::deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, ErrorKind::kCorruption, "config block");
  ModelConfig c;
  for (auto& v : c.stage_blocks) v = r.u32();
  for (auto& v : c.stage_channels) v = r.u32();
  c.latent_channels = r.u32();
  c.hyper_channels = r.u32();
  const std::uint32_t chunks = r.u32();
  if (chunks > 4096) fail(ErrorKind::kCorruption, "config block: absurd chunk count");
  c.chunk_plan.assign(chunks, 0);
  for (auto& v : c.chunk_plan) v = r.u32();
  c.hidden_ratio = r.u32();
  c.transform_kernel = r.u32();
  c.hyper_kernel = r.u32();
  c.hyper_blocks = r.u32();
  for (auto& v : c.hyper_synthesis_channels) v = r.u32();
  c.context_channels = r.u32();
  c.context_blocks = r.u32();
  c.aggregation_mixes = r.u32();
  c.aggregation_ratio = r.u32();
  if (!r.at_end()) fail(ErrorKind::kCorruption, "config block has trailing bytes");
  return c;
}

std::uint64_t ModelConfig::digest() const { return fnv1a64(serialize()); }

std::string ModelConfig::to_json() const {
  nlohmann::ordered_json j;
  j["stage_blocks"] = stage_blocks;
  j["stage_channels"] = stage_channels;
  j["latent_channels"] = latent_channels;
  j["hyper_channels"] = hyper_channels;
  j["chunk_plan"] = chunk_plan;
  j["hidden_ratio"] = hidden_ratio;
  j["transform_kernel"] = transform_kernel;
  j["hyper_kernel"] = hyper_kernel;
  j["hyper_blocks"] = hyper_blocks;
  j["hyper_synthesis_channels"] = hyper_synthesis_channels;
  j["context_channels"] = context_channels;
  j["context_blocks"] = context_blocks;
  j["aggregation_mixes"] = aggregation_mixes;
  j["aggregation_ratio"] = aggregation_ratio;
  return j.dump(2);
}

ModelConfig ModelConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, std::string("config json: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorKind::kFormat, "config json must be an object");
  ModelConfig c;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& key = it.key();
      const auto& v = it.value();
      if (key == "stage_blocks") v.get_to(c.stage_blocks);
      else if (key == "stage_channels") v.get_to(c.stage_channels);
      else if (key == "latent_channels") v.get_to(c.latent_channels);
      else if (key == "hyper_channels") v.get_to(c.hyper_channels);
      else if (key == "chunk_plan") v.get_to(c.chunk_plan);
      else if (key == "hidden_ratio") v.get_to(c.hidden_ratio);
      else if (key == "transform_kernel") v.get_to(c.transform_kernel);
      else if (key == "hyper_kernel") v.get_to(c.hyper_kernel);
      else if (key == "hyper_blocks") v.get_to(c.hyper_blocks);
      else if (key == "hyper_synthesis_channels") v.get_to(c.hyper_synthesis_channels);
      else if (key == "context_channels") v.get_to(c.context_channels);
      else if (key == "context_blocks") v.get_to(c.context_blocks);
      else if (key == "aggregation_mixes") v.get_to(c.aggregation_mixes);
      else if (key == "aggregation_ratio") v.get_to(c.aggregation_ratio);
      else fail(ErrorKind::kFormat, "config json: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, std::string("config json: ") + e.what());
  }
  // A different M without an explicit plan gets the default plan for it.
  if (!j.contains("chunk_plan") && c.latent_channels != 320) {
    c.chunk_plan = default_chunk_plan(c.latent_channels);
  }
  c.validate();
  return c;
}

ModelConfig ModelConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace lalic
