#include <sstream>
#include <string>

#include "doctest.h"
#include "lalic/config.hpp"
#include "lalic/error.hpp"
#include "lalic/image.hpp"
#include "lalic/selftest.hpp"
#include "lalic/transforms.hpp"
#include "lalic/weights.hpp"
#include "support.hpp"

using namespace lalic;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::kInvalidArgument;
}

std::string serialized(const WeightStore& store) {
  std::ostringstream out(std::ios::binary);
  write_weights(store, out);
  return out.str();
}

WeightStore reread(const std::string& bytes, const ModelConfig* expected = nullptr) {
  std::istringstream in(bytes, std::ios::binary);
  return read_weights(in, expected);
}

}  // namespace

TEST_CASE("config: json and binary round trips") {
  const ModelConfig d = ModelConfig::defaults();
  CHECK(ModelConfig::from_json(d.to_json()) == d);
  CHECK(ModelConfig::deserialize(d.serialize()) == d);
  CHECK(d.chunk_plan == std::vector<std::uint32_t>{16, 16, 32, 64, 192});
  CHECK(default_chunk_plan(320) == d.chunk_plan);
  CHECK(d.aggregation_width(0) == 2 * 16 + 128 + 640);

  const ModelConfig t = tiny_config();
  CHECK(ModelConfig::from_json(t.to_json()) == t);
  CHECK(t.digest() != d.digest());
  CHECK(ModelConfig::from_json(R"({"latent_channels": 320})") == d);
}

TEST_CASE("config: validation") {
  CHECK_THROWS_AS(ModelConfig::from_json(R"({"no_such_key": 1})"), Error);
  CHECK_THROWS_AS(ModelConfig::from_json("{"), Error);
  ModelConfig bad = ModelConfig::defaults();
  bad.chunk_plan = {16, 16, 32, 64, 100};
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = ModelConfig::defaults();
  bad.hidden_ratio = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK_THROWS_AS(default_chunk_plan(128), Error);
}

TEST_CASE("parameter count lands near the reported budget") {
  const double count = double(parameter_count(ModelConfig::defaults()));
  MESSAGE("default parameters: " << count);
  CHECK(count >= 0.85 * 63.24e6);
  CHECK(count <= 1.15 * 63.24e6);
  CHECK(init_weights(tiny_config(), 0).parameter_count() == parameter_count(tiny_config()));
}

TEST_CASE("weights: seeded init is deterministic") {
  const WeightStore a = init_weights(tiny_config(), 7), b = init_weights(tiny_config(), 7),
                    c = init_weights(tiny_config(), 8);
  CHECK(serialized(a) == serialized(b));
  CHECK(serialized(a) != serialized(c));
  a.validate();
  // Checkerboard mask on every spatial context kernel: only odd-parity taps.
  for (const auto& [name, t] : a.entries()) {
    if (name.find(".spatial.weight") == std::string::npos || name.find("entropy") == std::string::npos)
      continue;
    const std::size_t taps = t.size() / 25;
    for (std::size_t i = 0; i < taps; ++i)
      for (std::size_t r = 0; r < 5; ++r)
        for (std::size_t q = 0; q < 5; ++q)
          if ((r + q) % 2 == 0) CHECK(t[i * 25 + r * 5 + q] == 0.0f);
  }
}

TEST_CASE("weights: file round trip and failure modes") {
  const WeightStore store = init_weights(tiny_config(), 3);
  const std::string bytes = serialized(store);
  const WeightStore back = reread(bytes);
  CHECK(back.config() == store.config());
  CHECK(back.seed() == store.seed());
  CHECK(back.file_checksum().has_value());
  CHECK(serialized(back) == bytes);

  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK(kind_of([&] { reread(bad_magic); }) == ErrorKind::kFormat);

  CHECK(kind_of([&] { reread(bytes.substr(0, bytes.size() / 2)); }) == ErrorKind::kCorruption);

  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x10;
  CHECK(kind_of([&] { reread(flipped); }) == ErrorKind::kCorruption);

  const ModelConfig other = ModelConfig::defaults();
  CHECK(kind_of([&] { reread(bytes, &other); }) == ErrorKind::kConfigMismatch);

  // Drop one tensor: the error names it.
  WeightStore partial(store.config());
  const std::string dropped = store.entries()[5].first;
  for (const auto& [name, t] : store.entries())
    if (name != dropped) partial.insert(name, t);
  try {
    reread(serialized(partial));
    FAIL("missing tensor accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfigMismatch);
    CHECK(std::string(e.what()).find(dropped) != std::string::npos);
  }
}

TEST_CASE("transforms: shapes") {
  const WeightStore store = init_weights(tiny_config(), 0);
  const auto tf = Transforms<float>::from_store(store);
  Rng rng(40);
  const Tensor x = testing::random_tensor<float>({3, 64, 128}, rng, 0, 1);
  const Tensor y = tf.analysis(x);
  CHECK(y.shape() == Shape{24, 4, 8});
  const Tensor z = tf.hyper_analysis(y);
  CHECK(z.shape() == Shape{8, 1, 2});
  CHECK(tf.hyper_synthesis(z).shape() == Shape{48, 4, 8});
  const Tensor r = tf.synthesis(y);
  CHECK(r.shape() == x.shape());
  for (float v : r.values()) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
  CHECK_THROWS_AS(tf.analysis(testing::random_tensor<float>({3, 48, 64}, rng)), Error);

  ModelConfig wide = tiny_config();
  wide.latent_channels = 64;
  wide.chunk_plan = {8, 8, 16, 32};
  wide.hyper_synthesis_channels = {16, 64};
  const auto tw = Transforms<float>::from_store(init_weights(wide, 0));
  CHECK(tw.analysis(x).shape() == Shape{64, 4, 8});
}

TEST_CASE("transforms: zero weights give zero latents") {
  WeightStore store = init_weights(tiny_config(), 0);
  for (auto& [name, t] : store.entries())
    if (name.rfind("g_a.", 0) == 0) t.fill(0.0f);
  const auto tf = Transforms<float>::from_store(store);
  Rng rng(41);
  const Tensor y = tf.analysis(testing::random_tensor<float>({3, 64, 64}, rng, 0, 1));
  CHECK(testing::max_abs(y) == 0.0);
}

TEST_CASE("transforms: seeded golden latents") {
  const WeightStore store = init_weights(tiny_config(), 0);
  const Tensor x = image_to_tensor<float>(test_image(64, 64, 1));
  const Tensor y = Transforms<float>::from_store(store).analysis(x);
  const TensorD ref = Transforms<double>::from_store(store).analysis(x.cast<double>());
  CHECK(testing::max_abs_diff(y, ref) <= 1e-4 * testing::max_abs(ref));
  CHECK(testing::checksum(y) == 0x5e39b352981f14c6ull);
}
