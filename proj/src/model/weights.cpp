// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lalic/weights.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "lalic/bytes.hpp"
#include "lalic/checkerboard.hpp"
#include "lalic/rng.hpp"

namespace lalic {
namespace {

constexpr char kMagic[4] = {'L', 'A', 'L', 'W'};

class ManifestBuilder {
 public:
  explicit ManifestBuilder(const ModelConfig& c) : c_(c) {}

  void add(std::string name, Shape shape, InitRule rule, std::size_t fan = 1) {
    specs_.push_back({std::move(name), std::move(shape), rule, fan});
  }

  void conv(const std::string& name, std::size_t cin, std::size_t cout,
            std::size_t k) {
    add(name + ".weight", {cout, cin, k, k}, InitRule::kConv, cin * k * k);
    add(name + ".bias", {cout}, InitRule::kBias);
  }

  // Stride-2 transposed conv: each output sees about cin*k*k/4 taps.
  void deconv(const std::string& name, std::size_t cin, std::size_t cout,
              std::size_t k) {
    add(name + ".weight", {cin, cout, k, k}, InitRule::kConv,
        std::max<std::size_t>(1, cin * k * k / 4));
    add(name + ".bias", {cout}, InitRule::kBias);
  }

  void norm(const std::string& name, std::size_t c) {
    add(name + ".gamma", {c}, InitRule::kOnes);
    add(name + ".beta", {c}, InitRule::kZeros);
  }

  void channel_mix(const std::string& p, std::size_t c, std::size_t ratio,
                   bool with_shift) {
    norm(p + ".norm", c);
    if (with_shift) add(p + ".shift", {c, 1, 5, 5}, InitRule::kShift);
    add(p + ".receptance", {c, c}, InitRule::kConv, c);
    add(p + ".key", {ratio * c, c}, InitRule::kConv, c);
    add(p + ".value", {c, ratio * c}, InitRule::kOutputProjection, ratio * c);
  }

  void block(const std::string& p, std::size_t c) {
    const std::string s = p + ".spatial";
    norm(s + ".norm", c);
    add(s + ".shift", {c, 1, 5, 5}, InitRule::kShift);
    add(s + ".receptance", {c, c}, InitRule::kConv, c);
    add(s + ".key", {c, c}, InitRule::kConv, c);
    add(s + ".value", {c, c}, InitRule::kConv, c);
    add(s + ".decay", {c}, InitRule::kDecay);
    add(s + ".bonus", {c}, InitRule::kBonus);
    add(s + ".output", {c, c}, InitRule::kOutputProjection, c);
    channel_mix(p + ".channel", c, c_.hidden_ratio, true);
  }

  void blocks(const std::string& p, std::size_t n, std::size_t c) {
    for (std::size_t b = 0; b < n; ++b) block(p + ".block" + std::to_string(b), c);
  }

  std::vector<ParamSpec> build() {
    const auto widths = c_.transform_widths();
    const std::size_t tk = c_.transform_kernel, hk = c_.hyper_kernel;
    const std::size_t m = c_.latent_channels, n = c_.hyper_channels;

    std::size_t cin = 3;
    for (std::size_t s = 0; s < 4; ++s) {
      const std::string p = "g_a.stage" + std::to_string(s);
      conv(p + ".down", cin, widths[s], tk);
      blocks(p, c_.stage_blocks[s], widths[s]);
      cin = widths[s];
    }
    for (std::size_t s = 0; s < 4; ++s) {
      const std::size_t src = 3 - s;
      const std::string p = "g_s.stage" + std::to_string(s);
      blocks(p, c_.stage_blocks[src], widths[src]);
      deconv(p + ".up", widths[src], src == 0 ? 3 : widths[src - 1], tk);
    }

    conv("h_a.conv0", m, n, hk);
    blocks("h_a.stage0", c_.hyper_blocks, n);
    conv("h_a.conv1", n, n, hk);
    blocks("h_a.stage1", c_.hyper_blocks, n);
    conv("h_a.conv2", n, n, hk);

    const auto hs = c_.hyper_synthesis_channels;
    deconv("h_s.up0", n, hs[0], hk);
    blocks("h_s.stage0", c_.hyper_blocks, hs[0]);
    deconv("h_s.up1", hs[0], hs[1], hk);
    blocks("h_s.stage1", c_.hyper_blocks, hs[1]);
    conv("h_s.conv2", hs[1], 2 * m, hk);

    add("prior.mean", {n}, InitRule::kPriorMean);
    add("prior.log_scale", {n}, InitRule::kPriorLogScale);

    std::size_t decoded = 0;
    for (std::size_t j = 0; j < c_.chunk_plan.size(); ++j) {
      const std::size_t ck = c_.chunk_plan[j];
      const std::string p = "entropy.chunk" + std::to_string(j);
      add(p + ".spatial.weight", {2 * ck, ck, 5, 5}, InitRule::kSpatialContext,
          ck * 12);
      if (j > 0) {
        const std::size_t ctx = c_.context_channels;
        add(p + ".context.proj.weight", {ctx, decoded}, InitRule::kConv, decoded);
        add(p + ".context.proj.bias", {ctx}, InitRule::kBias);
        blocks(p + ".context", c_.context_blocks, ctx);
      }
      const std::size_t agg = c_.aggregation_width(j);
      for (std::size_t i = 0; i < c_.aggregation_mixes; ++i) {
        channel_mix(p + ".aggregate.mix" + std::to_string(i), agg,
                    c_.aggregation_ratio, false);
      }
      for (std::size_t part = 0; part < 2; ++part) {
        const std::string h = p + ".aggregate.head" + std::to_string(part);
        add(h + ".weight", {2 * ck, agg}, InitRule::kHead, agg);
        add(h + ".bias", {2 * ck}, InitRule::kZeros);
      }
      decoded += ck;
    }
    return std::move(specs_);
  }

 private:
  const ModelConfig& c_;
  std::vector<ParamSpec> specs_;
};

Tensor make_shift(Rng& rng, std::size_t c) {
  block::OmniShiftBranches<double> b;
  b.identity_scale.assign(c, 1.0);
  auto kernel = [&](std::size_t k) {
    TensorD t({c, 1, k, k});
    for (double& v : t.values()) v = rng.centered(1.0 / double(k));
    return t;
  };
  auto scales = [&] {
    std::vector<double> s(c);
    for (double& v : s) v = rng.uniform(0.0, 0.2);
    return s;
  };
  b.kernel1 = kernel(1);
  b.scale1 = scales();
  b.kernel3 = kernel(3);
  b.scale3 = scales();
  b.kernel5 = kernel(5);
  b.scale5 = scales();
  return block::omni_shift_merge(b).cast<float>();
}

Tensor make_param(Rng& rng, const ParamSpec& spec) {
  Tensor t(spec.shape);
  const double fan = double(spec.fan_in);
  auto fill = [&](auto draw) {
    for (float& v : t.values()) v = float(draw());
  };
  switch (spec.rule) {
    case InitRule::kConv:
      fill([&] { return rng.centered(1.0 / std::sqrt(fan)); });
      break;
    case InitRule::kBias:
      fill([&] { return rng.centered(0.01); });
      break;
    case InitRule::kOnes:
      t.fill(1.0f);
      break;
    case InitRule::kZeros:
      break;
    case InitRule::kOutputProjection:
      fill([&] { return rng.centered(0.01 / std::sqrt(fan)); });
      break;
    case InitRule::kDecay:
      fill([&] { return rng.uniform(-1.0, 5.0); });
      break;
    case InitRule::kBonus:
      fill([&] { return rng.uniform(-1.0, 1.0); });
      break;
    case InitRule::kShift:
      return make_shift(rng, spec.shape[0]);
    case InitRule::kSpatialContext: {
      fill([&] { return rng.centered(1.0 / std::sqrt(fan)); });
      const std::size_t k = spec.shape[3];
      const std::size_t taps = k * k;
      for (std::size_t i = 0; i < t.size(); ++i) {
        const std::size_t tap = i % taps;
        if (!spatial_context_tap(tap / k, tap % k, k)) t[i] = 0.0f;
      }
      break;
    }
    case InitRule::kHead:
      fill([&] { return rng.centered(0.1 / std::sqrt(fan)); });
      break;
    case InitRule::kPriorMean:
      fill([&] { return rng.centered(0.1); });
      break;
    case InitRule::kPriorLogScale:
      fill([&] { return rng.uniform(-0.5, 0.5); });
      break;
  }
  return t;
}

class HashingWriter {
 public:
  explicit HashingWriter(std::ostream& out) : out_(out) {}
  void write(std::span<const std::uint8_t> bytes) {
    hash_.update(bytes);
    out_.write(reinterpret_cast<const char*>(bytes.data()),
               std::streamsize(bytes.size()));
  }
  void write(ByteWriter& w) {
    write(w.buffer());
    w.buffer().clear();
  }
  std::uint64_t value() const { return hash_.value(); }

 private:
  std::ostream& out_;
  Fnv1a64 hash_;
};

class HashingReader {
 public:
  explicit HashingReader(std::istream& in) : in_(in) {}
  std::vector<std::uint8_t> read(std::size_t n) {
    std::vector<std::uint8_t> buf(n);
    in_.read(reinterpret_cast<char*>(buf.data()), std::streamsize(n));
    if (std::size_t(in_.gcount()) != n) {
      fail(ErrorKind::kCorruption, "weight file truncated at byte " +
                                       std::to_string(offset_ + in_.gcount()));
    }
    hash_.update(buf);
    offset_ += n;
    return buf;
  }
  std::uint32_t u32() {
    auto b = read(4);
    return ByteReader(b).u32();
  }
  std::uint64_t u64() {
    auto b = read(8);
    return ByteReader(b).u64();
  }
  void absorb(std::span<const std::uint8_t> bytes) { hash_.update(bytes); }
  std::uint64_t hash() const { return hash_.value(); }

 private:
  std::istream& in_;
  Fnv1a64 hash_;
  std::size_t offset_ = 0;
};

}  // namespace

std::vector<ParamSpec> parameter_manifest(const ModelConfig& config) {
  config.validate();
  return ManifestBuilder(config).build();
}

std::uint64_t parameter_count(const ModelConfig& config) {
  std::uint64_t total = 0;
  for (const auto& s : parameter_manifest(config)) total += element_count(s.shape);
  return total;
}

void WeightStore::insert(std::string name, Tensor tensor) {
  check_arg(!index_.contains(name), "duplicate weight tensor " + name);
  index_.emplace(name, entries_.size());
  entries_.emplace_back(std::move(name), std::move(tensor));
}

bool WeightStore::contains(std::string_view name) const {
  return index_.contains(std::string(name));
}

const Tensor& WeightStore::get(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) {
    fail(ErrorKind::kConfigMismatch,
         "weight tensor '" + std::string(name) + "' is missing");
  }
  return entries_[it->second].second;
}

Tensor& WeightStore::get_mutable(std::string_view name) {
  return const_cast<Tensor&>(std::as_const(*this).get(name));
}

std::uint64_t WeightStore::parameter_count() const {
  std::uint64_t total = 0;
  for (const auto& [name, t] : entries_) total += t.size();
  return total;
}

void WeightStore::validate() const {
  const auto manifest = parameter_manifest(config_);
  std::unordered_set<std::string> expected;
  for (const auto& spec : manifest) {
    const Tensor& t = get(spec.name);
    if (t.shape() != spec.shape) {
      fail(ErrorKind::kConfigMismatch,
           "weight tensor '" + spec.name + "' has shape " +
               to_string(t.shape()) + ", expected " + to_string(spec.shape));
    }
    expected.insert(spec.name);
  }
  for (const auto& [name, t] : entries_) {
    if (!expected.contains(name)) {
      fail(ErrorKind::kConfigMismatch,
           "unexpected weight tensor '" + name + "' for this config");
    }
  }
}

WeightStore init_weights(const ModelConfig& config, std::uint64_t seed) {
  WeightStore store(config);
  store.set_seed(seed);
  Rng rng(seed);
  for (const auto& spec : parameter_manifest(config)) {
    store.insert(spec.name, make_param(rng, spec));
  }
  return store;
}

std::uint64_t write_weights(const WeightStore& store, std::ostream& out) {
  HashingWriter hw(out);
  ByteWriter w;
  w.bytes({reinterpret_cast<const std::uint8_t*>(kMagic), 4});
  w.u32(kWeightFormatVersion);
  const auto config = store.config().serialize();
  w.u32(std::uint32_t(config.size()));
  w.bytes(config);
  w.u8(store.seed().has_value() ? 1 : 0);
  w.u64(store.seed().value_or(0));
  w.u32(std::uint32_t(store.entries().size()));
  hw.write(w);
  for (const auto& [name, t] : store.entries()) {
    w.u32(std::uint32_t(name.size()));
    w.text(name);
    w.u8(std::uint8_t(t.rank()));
    for (std::size_t e : t.shape()) w.u32(std::uint32_t(e));
    for (float v : t.values()) w.f32(v);
    hw.write(w);
  }
  const std::uint64_t checksum = hw.value();
  w.u64(checksum);
  out.write(reinterpret_cast<const char*>(w.buffer().data()), 8);
  if (!out) fail(ErrorKind::kIo, "failed writing weight stream");
  return checksum;
}

void save_weights(const WeightStore& store, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot open " + path + " for writing");
  write_weights(store, out);
  out.close();
  if (!out) fail(ErrorKind::kIo, "failed writing " + path);
}

WeightStore read_weights(std::istream& in, const ModelConfig* expected) {
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4 || !std::equal(magic, magic + 4, kMagic)) {
    fail(ErrorKind::kFormat, "not a weight file (bad magic)");
  }
  HashingReader r(in);
  r.absorb({reinterpret_cast<const std::uint8_t*>(kMagic), 4});

  const std::uint32_t version = r.u32();
  if (version != kWeightFormatVersion) {
    fail(ErrorKind::kFormat,
         "unsupported weight format version " + std::to_string(version));
  }
  const std::uint32_t config_len = r.u32();
  if (config_len > (1u << 20)) fail(ErrorKind::kCorruption, "config block too large");
  const ModelConfig config = ModelConfig::deserialize(r.read(config_len));
  try {
    config.validate();
  } catch (const Error& e) {
    fail(ErrorKind::kCorruption, std::string("weight file config: ") + e.what());
  }
  if (expected != nullptr && !(config == *expected)) {
    fail(ErrorKind::kConfigMismatch,
         "weight file was built for a different model config");
  }
  WeightStore store(config);
  const std::uint8_t has_seed = r.read(1)[0];
  const std::uint64_t seed = r.u64();
  if (has_seed) store.set_seed(seed);

  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = r.u32();
    if (name_len > 4096) fail(ErrorKind::kCorruption, "tensor name too long");
    auto name_bytes = r.read(name_len);
    std::string name(name_bytes.begin(), name_bytes.end());
    const std::uint8_t rank = r.read(1)[0];
    if (rank > 8) fail(ErrorKind::kCorruption, "tensor '" + name + "' rank too large");
    Shape shape(rank);
    for (auto& e : shape) e = r.u32();
    const std::size_t n = element_count(shape);
    if (n > (std::size_t{1} << 32)) {
      fail(ErrorKind::kCorruption, "tensor '" + name + "' too large");
    }
    auto raw = r.read(4 * n);
    std::vector<float> data(n);
    ByteReader values(raw);
    for (float& v : data) v = values.f32();
    if (store.contains(name)) {
      fail(ErrorKind::kCorruption, "duplicate tensor '" + name + "'");
    }
    store.insert(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  const std::uint64_t computed = r.hash();
  const std::uint64_t stored = r.u64();
  if (stored != computed) {
    fail(ErrorKind::kCorruption, "weight file checksum mismatch");
  }
  store.set_file_checksum(stored);
  store.validate();
  return store;
}

WeightStore load_weights(const std::string& path, const ModelConfig* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open weight file " + path);
  return read_weights(in, expected);
}

}  // namespace lalic
