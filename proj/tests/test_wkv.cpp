#include <cmath>
#include <vector>

#include "doctest.h"
#include "lalic/error.hpp"
#include "lalic/selftest.hpp"
#include "lalic/wkv.hpp"
#include "support.hpp"

using namespace lalic;
using testing::random_tensor;

namespace {

// The weighted sum written out term by term, no shifting: only for small,
// tame inputs.
TensorD direct_biwkv(const TensorD& k, const TensorD& v, const std::vector<double>& w,
                     const std::vector<double>& u) {
  const std::size_t c = k.dim(0), t = k.dim(1);
  TensorD out({c, t});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < t; ++i) {
      double num = 0, den = 0;
      for (std::size_t j = 0; j < t; ++j) {
        const double dist = double(i > j ? i - j : j - i);
        const double e = i == j ? std::exp(u[ch] + k.at(ch, j))
                                : std::exp(-(dist - 1) / double(t) * w[ch] + k.at(ch, j));
        num += e * v.at(ch, j);
        den += e;
      }
      out.at(ch, i) = num / den;
    }
  return out;
}

wkv::AttentionParams<double> params(std::vector<double> w, std::vector<double> u) {
  return {std::move(w), std::move(u)};
}

}  // namespace

TEST_CASE("aft_reference") {
  Rng rng(10);
  const TensorD v1 = random_tensor<double>({3, 1}, rng);
  CHECK(wkv::aft_reference(random_tensor<double>({3, 1}, rng), v1) == v1);

  const TensorD v = random_tensor<double>({2, 6}, rng);
  const TensorD flat = wkv::aft_reference(TensorD({2, 6}, 0.7), v);
  for (std::size_t c = 0; c < 2; ++c) {
    double mean = 0;
    for (std::size_t t = 0; t < 6; ++t) mean += v.at(c, t) / 6;
    for (std::size_t t = 0; t < 6; ++t) CHECK(flat.at(c, t) == doctest::Approx(mean).epsilon(1e-14));
  }

  const TensorD k = random_tensor<double>({4, 16}, rng, -3, 3);
  const TensorD vv = random_tensor<double>({4, 16}, rng);
  const TensorD a = wkv::aft_reference(k, vv);
  double worst = 0;
  for (std::size_t c = 0; c < 4; ++c) {
    double num = 0, den = 0;
    for (std::size_t t = 0; t < 16; ++t) {
      num += std::exp(k.at(c, t)) * vv.at(c, t);
      den += std::exp(k.at(c, t));
    }
    for (std::size_t t = 0; t < 16; ++t) worst = std::max(worst, std::abs(a.at(c, t) - num / den));
  }
  CHECK(worst <= 1e-12);

  const TensorD huge({1, 3}, std::vector<double>{800, 801, 799});
  const TensorD out = wkv::aft_reference(huge, TensorD({1, 3}, std::vector<double>{1, 2, 3}));
  for (double e : out.values()) {
    CHECK(std::isfinite(e));
  }
}

TEST_CASE("biwkv_reference: hand-expanded T=3 example") {
  const TensorD k({1, 3}, 0.0), v({1, 3}, std::vector<double>{1, 0, 0});
  const TensorD y = wkv::biwkv_reference(k, v, params({std::log(2.0) * 3}, {0.0}));
  CHECK(y.at(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(y.at(0, 2) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(wkv::biwkv_scan(k, v, params({std::log(2.0) * 3}, {0.0})).at(0, 2) ==
        doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("biwkv_reference agrees with the unshifted formula") {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t c = std::size_t(rng.integer(1, 5)), t = std::size_t(rng.integer(1, 20));
    const TensorD k = random_tensor<double>({c, t}, rng, -2, 2), v = random_tensor<double>({c, t}, rng);
    std::vector<double> w, u;
    for (std::size_t i = 0; i < c; ++i) {
      w.push_back(rng.uniform(-1, 4));
      u.push_back(rng.uniform(-1, 1));
    }
    const TensorD ref = direct_biwkv(k, v, w, u);
    CHECK(testing::max_abs_diff(wkv::biwkv_reference(k, v, params(w, u)), ref) < 1e-13);
    CHECK(testing::max_abs_diff(wkv::biwkv_scan(k, v, params(w, u)), ref) < 1e-12);
  }
}

TEST_CASE("biwkv: degenerate limits") {
  Rng rng(12);
  const Tensor v1 = random_tensor<float>({5, 1}, rng);
  const Tensor k1 = random_tensor<float>({5, 1}, rng, -3, 3);
  wkv::AttentionParams<float> p{std::vector<float>(5, 2.0f), std::vector<float>(5, -1.0f)};
  CHECK(wkv::biwkv_scan(k1, v1, p) == v1);
  CHECK(wkv::biwkv_reference(k1, v1, p) == v1);

  const TensorD v = random_tensor<double>({3, 10}, rng);
  const TensorD mean = wkv::biwkv_scan(TensorD({3, 10}), v, params({0, 0, 0}, {0, 0, 0}));
  CHECK(testing::max_abs_diff(mean, wkv::aft_reference(TensorD({3, 10}), v)) < 1e-6);

  const TensorD k = random_tensor<double>({3, 10}, rng, -2, 2);
  TensorD shifted = k;
  for (double& e : shifted.values()) e += 7.5;
  const auto pr = params({1.5, -0.5, 3}, {0.2, -0.3, 1});
  CHECK(testing::max_abs_diff(wkv::biwkv_scan(k, v, pr), wkv::biwkv_scan(shifted, v, pr)) < 1e-6);

  // Strong bonus: output tracks the current token.
  const TensorD big = wkv::biwkv_scan(TensorD({3, 10}), v, params({50, 50, 50}, {50, 50, 50}));
  CHECK(testing::max_abs_diff(big, v) < 1e-4);
}

TEST_CASE("biwkv: convexity and extreme inputs stay finite") {
  Rng rng(13);
  const std::size_t c = 4, t = 256;
  const Tensor k = random_tensor<float>({c, t}, rng, -60, 60);
  const Tensor v = random_tensor<float>({c, t}, rng);
  wkv::AttentionParams<float> p{{-40, 0, 40, 500}, {-30, 0, 30, 80}};
  const Tensor y = wkv::biwkv_scan(k, v, p);
  for (std::size_t ch = 0; ch < c; ++ch) {
    float lo = 1e9f, hi = -1e9f;
    for (std::size_t i = 0; i < t; ++i) {
      lo = std::min(lo, v.at(ch, i));
      hi = std::max(hi, v.at(ch, i));
    }
    for (std::size_t i = 0; i < t; ++i) {
      CHECK(std::isfinite(y.at(ch, i)));
      CHECK(y.at(ch, i) >= lo - 1e-5f);
      CHECK(y.at(ch, i) <= hi + 1e-5f);
    }
  }
}

TEST_CASE("biwkv_scan matches the reference") {
  CHECK(kernel_equivalence_error<float>(100, 21) <= 1e-5);
  CHECK(kernel_equivalence_error<double>(100, 22) <= 1e-10);
}

TEST_CASE("biwkv_backward") {
  Rng rng(14);
  const TensorD k = random_tensor<double>({3, 8}, rng), v = random_tensor<double>({3, 8}, rng);
  const auto p = params({1, 2, -0.5}, {0.1, 0.2, 0.3});
  const auto zero = wkv::biwkv_backward(k, v, p, TensorD({3, 8}));
  CHECK(testing::max_abs(zero.d_key) == 0.0);
  CHECK(testing::max_abs(zero.d_value) == 0.0);
  for (double d : zero.d_decay) CHECK(d == 0.0);
  for (double d : zero.d_bonus) CHECK(d == 0.0);

  const TensorD k1 = random_tensor<double>({2, 1}, rng), v1 = random_tensor<double>({2, 1}, rng),
                g1 = random_tensor<double>({2, 1}, rng);
  const auto one = wkv::biwkv_backward(k1, v1, params({1, 1}, {1, 1}), g1);
  CHECK(one.d_value == g1);
  CHECK(testing::max_abs(one.d_key) == 0.0);
  for (double d : one.d_decay) CHECK(d == 0.0);
  for (double d : one.d_bonus) CHECK(d == 0.0);

  CHECK(gradient_check_error(20, 15) <= 1e-6);
}

TEST_CASE("op_count") {
  using wkv::Mechanism;
  CHECK(wkv::op_count(Mechanism::kAft, 1024, 64) == 458752);
  CHECK(wkv::op_count(Mechanism::kBiwkvShift, 1, 1) == 79);
  CHECK(wkv::op_count(Mechanism::kSelectiveScan2D, 10, 10) == 57600);
  const std::uint64_t expect[] = {7, 57, 79, 128, 144, 576};
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(wkv::op_coefficient(wkv::kAllMechanisms[i]) == expect[i]);
    CHECK(wkv::parse_mechanism(wkv::to_string(wkv::kAllMechanisms[i])) == wkv::kAllMechanisms[i]);
    CHECK(wkv::op_count(wkv::kAllMechanisms[i], 37, 11) == expect[i] * 37 * 11);
  }
  CHECK_THROWS_AS(wkv::parse_mechanism("Softmax"), Error);
  CHECK_THROWS_AS(wkv::op_count(Mechanism::kAft, 0, 3), Error);
}
