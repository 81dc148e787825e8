#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "lalic/entropy_model.hpp"
#include "lalic/error.hpp"
#include "lalic/range_codec.hpp"
#include "lalic/selftest.hpp"
#include "support.hpp"

using namespace lalic;
using namespace lalic::entropy;
using testing::random_tensor;

namespace {

// Round half away from zero without calling std::round: split off the
// integer part (exact for doubles) and look at the fraction.
double round_half_away(double d) {
  const double whole = std::trunc(d), frac = d - whole;
  if (frac >= 0.5) return whole + 1;
  if (frac <= -0.5) return whole - 1;
  return whole;
}

WeightStore tiny_store(std::uint64_t seed = 0) { return init_weights(tiny_config(), seed); }

}  // namespace

TEST_CASE("checkerboard partition") {
  CHECK(is_anchor(0, 0));
  CHECK(!is_anchor(0, 1));
  CHECK(!is_anchor(1, 0));
  CHECK(is_anchor(1, 1));
  CHECK(part_positions(2, 2, Part::kAnchor) == std::vector<std::size_t>{0, 3});
  CHECK(part_positions(2, 2, Part::kNonAnchor) == std::vector<std::size_t>{1, 2});
  CHECK(part_positions(3, 3, Part::kAnchor).size() == 5);
  CHECK(part_positions(3, 3, Part::kNonAnchor).size() == 4);

  Rng rng(50);
  const TensorD t = random_tensor<double>({3, 5, 7}, rng);
  const auto [a, n] = checkerboard_split(t);
  CHECK(checkerboard_merge(a, n) == t);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t r = 0; r < 5; ++r)
      for (std::size_t x = 0; x < 7; ++x) {
        CHECK((is_anchor(r, x) ? n : a).at(c, r, x) == 0.0);
      }
  CHECK_THROWS_AS(checkerboard_merge(a, TensorD({3, 5, 6})), Error);
}

TEST_CASE("chunk plan and schedule") {
  const ChunkPlan plan = ChunkPlan::for_latent(320);
  CHECK(plan.counts() == std::vector<std::uint32_t>{16, 16, 32, 64, 192});
  CHECK(plan.offset(3) == 64);
  CHECK(plan.total() == 320);
  const auto units = coding_schedule(plan);
  REQUIRE(units.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(units[i].chunk == i / 2);
    CHECK(units[i].part == (i % 2 == 0 ? Part::kAnchor : Part::kNonAnchor));
    CHECK(units[i].channel_begin == plan.offset(i / 2));
    CHECK(units[i].channel_count == plan.count(i / 2));
  }
  CHECK_THROWS_AS(ChunkPlan({}), Error);
  CHECK_THROWS_AS(ChunkPlan({4, 0}), Error);
}

TEST_CASE("scale_from_log clamps") {
  CHECK(scale_from_log(0.0) == 1.0);
  CHECK(scale_from_log(-100.0) == 0.04);
  CHECK(scale_from_log(100.0) == 256.0);
  CHECK(scale_from_log(-100.0f) == 0.04f);
  CHECK(scale_from_log(std::log(3.0)) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("quantize_shifted: examples") {
  const TensorD y({1, 1, 3}, std::vector<double>{2.3, -1.5, 0.5});
  const TensorD mu({1, 1, 3}, std::vector<double>{0.4, 0.0, 0.0});
  const auto q = quantize_shifted(y, mu);
  CHECK(q.symbols == std::vector<int>{2, -2, 1});
  CHECK(q.y_hat[0] == doctest::Approx(2.4).epsilon(1e-15));
  CHECK(q.y_hat[1] == -2.0);
  CHECK(q.y_hat[2] == 1.0);
  CHECK_THROWS_AS(quantize_shifted(y, TensorD({1, 1, 2})), Error);
}

TEST_CASE("quantize_shifted: randomized sweep") {
  Rng rng(51);
  const std::size_t n = 1000000;
  TensorD y({n}), mu({n});
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 10 == 0) {  // exact ties
      mu[i] = double(rng.integer(-64, 64)) / 4;
      y[i] = mu[i] + double(rng.integer(-50, 50)) + 0.5;
    } else {
      mu[i] = rng.uniform(-20, 20);
      y[i] = rng.uniform(-80, 80);
    }
  }
  const auto q = quantize_shifted(y, mu);
  std::size_t violations = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = round_half_away(y[i] - mu[i]);
    if (q.symbols[i] != int(r) || q.y_hat[i] != r + mu[i]) ++violations;
    if (std::abs(q.y_hat[i] - y[i]) > 0.5) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("spatial context") {
  const auto model = EntropyModel<double>::from_store(tiny_store());
  Rng rng(52);
  const TensorD anchors = random_tensor<double>({2, 6, 6}, rng);
  const TensorD zero = model.spatial_context(0, Part::kAnchor, anchors);
  CHECK(zero.shape() == Shape{4, 6, 6});
  CHECK(testing::max_abs(zero) == 0.0);
  const TensorD ctx = model.spatial_context(0, Part::kNonAnchor, anchors);
  CHECK(testing::max_abs(ctx) > 0.0);
  // Non-anchor outputs read anchor sites only.
  TensorD noisy = anchors;
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t r = 0; r < 6; ++r)
      for (std::size_t x = 0; x < 6; ++x)
        if (!is_anchor(r, x)) noisy.at(c, r, x) += 10;
  const TensorD ctx2 = model.spatial_context(0, Part::kNonAnchor, noisy);
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t r = 0; r < 6; ++r)
      for (std::size_t x = 0; x < 6; ++x)
        if (!is_anchor(r, x)) CHECK(ctx2.at(c, r, x) == ctx.at(c, r, x));
}

TEST_CASE("channel context") {
  const WeightStore store = tiny_store();
  const auto model = EntropyModel<float>::from_store(store);
  Rng rng(53);
  const Tensor first = model.channel_context(0, {}, 4, 6);
  CHECK(first.shape() == Shape{8, 4, 6});
  CHECK(testing::max_abs(first) == 0.0);

  std::vector<Tensor> decoded;
  for (std::size_t k = 0; k < 3; ++k)
    decoded.push_back(random_tensor<float>({model.plan().count(k), 4, 6}, rng, -3, 3));
  CHECK_THROWS_AS(model.channel_context(3, std::span(decoded).first(2), 4, 6), Error);
  CHECK_THROWS_AS(model.channel_context(2, decoded, 4, 6), Error);

  const Tensor ctx = model.channel_context(3, decoded, 4, 6);
  CHECK(ctx.shape() == Shape{8, 4, 6});
  std::vector<TensorD> wide;
  for (const auto& d : decoded) wide.push_back(d.cast<double>());
  const TensorD ref = EntropyModel<double>::from_store(store).channel_context(3, wide, 4, 6);
  CHECK(testing::max_abs_diff(ctx, ref) <= 1e-5 * testing::max_abs(ref));
  CHECK(testing::checksum(ctx) == 0x4236ffff1497aa7bull);
}

TEST_CASE("aggregate") {
  WeightStore store = tiny_store();
  Rng rng(54);
  const TensorD sp = random_tensor<double>({4, 4, 4}, rng), ch = random_tensor<double>({8, 4, 4}, rng),
                hp = random_tensor<double>({48, 4, 4}, rng);
  const std::vector<std::size_t> all = part_positions(4, 4, Part::kNonAnchor);
  {
    const auto model = EntropyModel<double>::from_store(store);
    const auto g = model.aggregate(0, Part::kNonAnchor, sp, ch, hp, all);
    CHECK(g.mean.shape() == Shape{2, 8});
    // Location-wise: a single position sees only its own context column.
    const std::vector<std::size_t> one{all[3]};
    const auto g1 = model.aggregate(0, Part::kNonAnchor, sp, ch, hp, one);
    TensorD sp2 = sp;
    sp2[all[5]] += 5;
    const auto g2 = model.aggregate(0, Part::kNonAnchor, sp2, ch, hp, one);
    CHECK(g1.mean == g2.mean);
    CHECK(g1.scale == g2.scale);
    for (std::size_t c = 0; c < 2; ++c) {
      CHECK(g1.mean[c] == g.mean.at(c, 3));
      CHECK(g1.scale[c] == g.scale.at(c, 3));
    }
    CHECK_THROWS_AS(model.aggregate(0, Part::kNonAnchor, sp, ch, hp, std::vector<std::size_t>{16}),
                    Error);
  }
  store.get_mutable("entropy.chunk0.aggregate.head1.weight").fill(0.0f);
  store.get_mutable("entropy.chunk0.aggregate.head1.bias").fill(0.0f);
  {
    const auto g = EntropyModel<double>::from_store(store).aggregate(0, Part::kNonAnchor, sp, ch, hp, all);
    CHECK(testing::max_abs(g.mean) == 0.0);
    for (double s : g.scale.values()) CHECK(s == 1.0);
  }
  Tensor& bias = store.get_mutable("entropy.chunk0.aggregate.head1.bias");
  for (std::size_t i = 2; i < 4; ++i) bias[i] = -100.0f;
  {
    const auto g = EntropyModel<double>::from_store(store).aggregate(0, Part::kNonAnchor, sp, ch, hp, all);
    for (double s : g.scale.values()) CHECK(s == 0.04);
  }
}

TEST_CASE("schedule causality") {
  const CheckResult r = probe_schedule_causality(tiny_store(), 6, 6, 55);
  INFO(r.detail);
  CHECK(r.passed);
}

TEST_CASE("run_schedule: encoder and decoder agree") {
  const auto model = EntropyModel<float>::from_store(tiny_store());
  Rng rng(56);
  const Tensor y = random_tensor<float>({24, 4, 6}, rng, -6, 6);
  const Tensor hyper = random_tensor<float>({48, 4, 6}, rng, -1, 1);

  std::map<std::size_t, std::vector<std::uint8_t>> segments;
  auto cdfs_for = [](const GaussianParams<float>& p) {
    std::vector<codec::QuantizedCdf> cdfs;
    for (float s : p.scale.values()) cdfs.push_back(codec::build_cdf(0.0, s));
    return cdfs;
  };
  std::size_t index = 0;
  const Tensor enc = model.run_schedule(
      Mode::kEncode, y, hyper,
      [&](const CodingUnit&, std::span<const std::size_t>, const GaussianParams<float>& p,
          std::span<int> symbols) {
        segments[index++] = codec::encode(symbols, cdfs_for(p));
      });
  CHECK(index == 10);
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(std::abs(enc[i] - y[i]) <= 0.5f);

  index = 0;
  const Tensor dec = model.run_schedule(
      Mode::kDecode, Tensor(), hyper,
      [&](const CodingUnit&, std::span<const std::size_t>, const GaussianParams<float>& p,
          std::span<int> symbols) {
        const auto out = codec::decode(segments[index++], cdfs_for(p));
        std::copy(out.begin(), out.end(), symbols.begin());
      });
  CHECK(testing::bits_equal(enc, dec));
}
