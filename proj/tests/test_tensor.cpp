#include <cmath>
#include <vector>

#include "doctest.h"
#include "lalic/error.hpp"
#include "lalic/ops.hpp"
#include "lalic/simd/kernels.hpp"
#include "support.hpp"

using namespace lalic;
using testing::random_tensor;

namespace {

// Direct cross-correlation, one output at a time.
TensorD naive_conv(const TensorD& x, const TensorD& k, std::size_t stride, std::size_t pad) {
  const std::size_t cin = x.dim(0), h = x.dim(1), w = x.dim(2);
  const std::size_t cout = k.dim(0), ks = k.dim(2);
  const std::size_t ho = (h + 2 * pad - ks) / stride + 1, wo = (w + 2 * pad - ks) / stride + 1;
  TensorD out({cout, ho, wo});
  for (std::size_t o = 0; o < cout; ++o)
    for (std::size_t r = 0; r < ho; ++r)
      for (std::size_t c = 0; c < wo; ++c) {
        double s = 0;
        for (std::size_t i = 0; i < cin; ++i)
          for (std::size_t a = 0; a < ks; ++a)
            for (std::size_t b = 0; b < ks; ++b) {
              const long y = long(r * stride + a) - long(pad), xx = long(c * stride + b) - long(pad);
              if (y < 0 || xx < 0 || y >= long(h) || xx >= long(w)) continue;
              s += x.at(i, y, xx) * k[((o * cin + i) * ks + a) * ks + b];
            }
        out.at(o, r, c) = s;
      }
  return out;
}

double dot(const TensorD& a, const TensorD& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TEST_CASE("conv2d: ones kernel, stride 2, pad 1") {
  const Tensor x({1, 4, 4}, 1.0f), k({1, 1, 3, 3}, 1.0f);
  const Tensor y = ops::conv2d<float>(x, k, {}, 2, 1);
  CHECK(y.shape() == Shape{1, 2, 2});
  CHECK(y.values()[0] == 4.0f);
  CHECK(y.values()[1] == 6.0f);
  CHECK(y.values()[2] == 6.0f);
  CHECK(y.values()[3] == 9.0f);
  CHECK(naive_conv(x.cast<double>(), k.cast<double>(), 2, 1) == y.cast<double>());
}

TEST_CASE("conv2d: identity, shapes, brute-force agreement, errors") {
  Rng rng(1);
  const Tensor x = random_tensor<float>({3, 7, 9}, rng);
  Tensor id({3, 3, 1, 1});
  for (std::size_t c = 0; c < 3; ++c) id[c * 3 + c] = 1.0f;
  CHECK(ops::conv2d<float>(x, id, {}, 1, 0) == x);

  CHECK(ops::conv2d<float>(Tensor({3, 64, 64}), Tensor({96, 3, 5, 5}), {}, 2, 2).shape() ==
        Shape{96, 32, 32});

  const TensorD xd = random_tensor<double>({4, 11, 10}, rng);
  const TensorD kd = random_tensor<double>({5, 4, 5, 5}, rng);
  std::vector<double> bias{0.5, -1, 0, 2, 3};
  TensorD ref = naive_conv(xd, kd, 2, 2);
  for (std::size_t o = 0; o < 5; ++o)
    for (std::size_t i = 0; i < ref.dim(1) * ref.dim(2); ++i) ref[o * ref.dim(1) * ref.dim(2) + i] += bias[o];
  CHECK(testing::max_abs_diff(ops::conv2d<double>(xd, kd, bias, 2, 2), ref) < 1e-12);

  CHECK_THROWS_AS(ops::conv2d<float>(Tensor({2, 8, 8}), Tensor({4, 3, 3, 3}), {}, 1, 1), Error);
}

TEST_CASE("deconv2d: adjoint of conv2d") {
  Rng rng(2);
  const TensorD k = random_tensor<double>({2, 3, 3, 3}, rng);  // conv: 3 -> 2 channels
  const TensorD x = random_tensor<double>({3, 8, 8}, rng);
  const TensorD y = random_tensor<double>({2, 4, 4}, rng);
  const TensorD cx = ops::conv2d<double>(x, k, {}, 2, 1);
  const TensorD dy = ops::deconv2d<double>(y, k, {}, 2, 1, 1);
  REQUIRE(cx.shape() == y.shape());
  REQUIRE(dy.shape() == x.shape());
  const double lhs = dot(cx, y), rhs = dot(x, dy);
  CHECK(std::abs(lhs - rhs) <= 1e-5 * std::max(std::abs(lhs), 1.0));

  // float path too
  const Tensor kf = k.cast<float>();
  const double lf = dot(ops::conv2d<float>(x.cast<float>(), kf, {}, 2, 1).cast<double>(), y);
  const double rf = dot(x, ops::deconv2d<float>(y.cast<float>(), kf, {}, 2, 1, 1).cast<double>());
  CHECK(std::abs(lf - rf) <= 1e-5 * std::max(std::abs(lf), 1.0));
}

TEST_CASE("deconv2d: identity and shapes") {
  Rng rng(3);
  const Tensor x = random_tensor<float>({2, 5, 6}, rng);
  Tensor id({2, 2, 1, 1});
  id[0] = 1.0f;
  id[3] = 1.0f;
  CHECK(ops::deconv2d<float>(x, id, {}, 1, 0, 0) == x);
  CHECK(ops::deconv2d<float>(Tensor({320, 16, 16}), Tensor({320, 256, 5, 5}), {}, 2, 2, 1).shape() ==
        Shape{256, 32, 32});
}

TEST_CASE("depthwise_conv2d") {
  Rng rng(4);
  const Tensor x = random_tensor<float>({4, 8, 8}, rng);
  Tensor delta({4, 1, 5, 5});
  for (std::size_t c = 0; c < 4; ++c) delta[c * 25 + 12] = 1.0f;
  CHECK(ops::depthwise_conv2d(x, delta) == x);

  const Tensor ones({1, 1, 5, 5}, 1.0f);
  const Tensor cst({1, 9, 9}, 0.75f);
  CHECK(ops::depthwise_conv2d(cst, ones).at(0, 4, 4) == doctest::Approx(25 * 0.75));

  const Tensor k = random_tensor<float>({4, 1, 5, 5}, rng);
  const Tensor y = ops::depthwise_conv2d(x, k);
  double worst = 0;
  for (std::size_t c = 0; c < 4; ++c)
    for (long r = 0; r < 8; ++r)
      for (long q = 0; q < 8; ++q) {
        double s = 0;
        for (long a = -2; a <= 2; ++a)
          for (long b = -2; b <= 2; ++b) {
            if (r + a < 0 || r + a >= 8 || q + b < 0 || q + b >= 8) continue;
            s += double(x.at(c, r + a, q + b)) * double(k[c * 25 + (a + 2) * 5 + (b + 2)]);
          }
        worst = std::max(worst, std::abs(s - double(y.at(c, r, q))));
      }
  CHECK(worst < 1e-6);
  CHECK_THROWS_AS(ops::depthwise_conv2d(x, Tensor({3, 1, 5, 5})), Error);
}

TEST_CASE("layer_norm") {
  const TensorD x({2, 1}, std::vector<double>{1, 3});
  const TensorD y = ops::layer_norm<double>(x, std::vector<double>{1, 1}, std::vector<double>{0, 0}, 0.0);
  CHECK(y[0] == doctest::Approx(-1.0));
  CHECK(y[1] == doctest::Approx(1.0));

  const Tensor c({4, 3}, 2.5f);
  const Tensor z = ops::layer_norm<float>(c, std::vector<float>(4, 1), std::vector<float>(4, 0), 1e-5f);
  for (float v : z.values()) CHECK(v == 0.0f);

  Rng rng(5);
  const Tensor r = random_tensor<float>({6, 5}, rng);
  std::vector<float> beta{1, 2, 3, 4, 5, 6};
  const Tensor b = ops::layer_norm<float>(r, std::vector<float>(6, 0), beta, 1e-5f);
  for (std::size_t ch = 0; ch < 6; ++ch)
    for (std::size_t t = 0; t < 5; ++t) CHECK(b.at(ch, t) == beta[ch]);
}

TEST_CASE("linear") {
  const Tensor x({2, 1}, std::vector<float>{1, 2});
  const Tensor w({2, 2}, std::vector<float>{1, 1, 1, -1});
  const Tensor y = ops::linear<float>(x, w);
  CHECK(y[0] == 3.0f);
  CHECK(y[1] == -1.0f);

  Rng rng(6);
  const Tensor xs = random_tensor<float>({32, 100}, rng);  // (Cin,T)
  const Tensor ws = random_tensor<float>({64, 32}, rng);
  const Tensor out = ops::linear<float>(xs, ws);
  double worst = 0;
  for (std::size_t o = 0; o < 64; ++o)
    for (std::size_t t = 0; t < 100; ++t) {
      double s = 0;
      for (std::size_t i = 0; i < 32; ++i) s += double(ws.at(o, i)) * double(xs.at(i, t));
      worst = std::max(worst, std::abs(s - double(out.at(o, t))));
    }
  CHECK(worst < 1e-5);
  CHECK_THROWS_AS(ops::linear<float>(xs, Tensor({4, 31})), Error);
}

TEST_CASE("activations") {
  CHECK(ops::sigmoid(0.0f) == 0.5f);
  const Tensor sr = ops::squared_relu(Tensor({2}, std::vector<float>{-3, 2}));
  CHECK(sr[0] == 0.0f);
  CHECK(sr[1] == 4.0f);
  Tensor s({200});
  for (std::size_t i = 0; i < 200; ++i) s[i] = -20.0f + 0.2f * float(i);
  const Tensor g = ops::sigmoid(s);
  for (std::size_t i = 1; i < 200; ++i) CHECK(g[i] >= g[i - 1]);
  for (float v : g.values()) CHECK((v > 0.0f && v <= 1.0f));
}

TEST_CASE("sequence view round trip") {
  Rng rng(7);
  const Tensor f = random_tensor<float>({3, 4, 5}, rng);
  const Tensor seq = to_sequence(f);
  CHECK(seq.shape() == Shape{3, 20});
  CHECK(seq.at(2, 1 * 5 + 3) == f.at(2, 1, 3));
  CHECK(from_sequence(seq, 4, 5) == f);
}

TEST_CASE("simd: avx2 kernels are bit-identical to scalar") {
  if (!simd::isa_available(simd::Isa::kAvx2)) {
    MESSAGE("AVX2 not available; skipped");
    return;
  }
  const auto& sc = simd::kernel_table(simd::Isa::kScalar);
  const auto& av = simd::kernel_table(simd::Isa::kAvx2);
  Rng rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t m = std::size_t(rng.integer(1, 13)), n = std::size_t(rng.integer(1, 300)),
                      k = std::size_t(rng.integer(1, 40));
    const Tensor a = random_tensor<float>({m, k}, rng), b = random_tensor<float>({k, n}, rng);
    Tensor c1 = random_tensor<float>({m, n}, rng), c2 = c1;
    sc.gemm_acc(m, n, k, a.data(), k, b.data(), n, c1.data(), n);
    av.gemm_acc(m, n, k, a.data(), k, b.data(), n, c2.data(), n);
    CHECK(testing::bits_equal(c1, c2));

    Tensor y1 = random_tensor<float>({n}, rng), y2 = y1;
    const Tensor xv = random_tensor<float>({n}, rng);
    sc.axpy(n, 0.37f, xv.data(), y1.data());
    av.axpy(n, 0.37f, xv.data(), y2.data());
    CHECK(testing::bits_equal(y1, y2));
  }

  // Whole ops under each active table.
  const Tensor x = random_tensor<float>({5, 19, 23}, rng);
  const Tensor k = random_tensor<float>({7, 5, 5, 5}, rng);
  const Tensor dk = random_tensor<float>({5, 1, 5, 5}, rng);
  const simd::Isa before = simd::active().isa;
  simd::set_active(simd::Isa::kScalar);
  const Tensor s_conv = ops::conv2d<float>(x, k, {}, 2, 2);
  const Tensor s_dec = ops::deconv2d<float>(s_conv, k, {}, 2, 2, 1);
  const Tensor s_dw = ops::depthwise_conv2d(x, dk);
  simd::set_active(simd::Isa::kAvx2);
  CHECK(testing::bits_equal(s_conv, ops::conv2d<float>(x, k, {}, 2, 2)));
  CHECK(testing::bits_equal(s_dec, ops::deconv2d<float>(s_conv, k, {}, 2, 2, 1)));
  CHECK(testing::bits_equal(s_dw, ops::depthwise_conv2d(x, dk)));
  simd::set_active(before);
}
