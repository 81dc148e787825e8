// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

// Compiled with -mavx2 only (no -mfma): every lane performs the exact
// mul-then-add rounding sequence of the scalar reference.

#include <immintrin.h>

#include "lalic/simd/kernels.hpp"

namespace lalic::simd::avx2 {
namespace {

// 4x16 register tile of C, k streamed.
inline void tile_4x16(std::size_t k, const float* a, std::size_t lda,
                      const float* b, std::size_t ldb, float* c,
                      std::size_t ldc) {
  __m256 c00 = _mm256_loadu_ps(c), c01 = _mm256_loadu_ps(c + 8);
  __m256 c10 = _mm256_loadu_ps(c + ldc), c11 = _mm256_loadu_ps(c + ldc + 8);
  __m256 c20 = _mm256_loadu_ps(c + 2 * ldc);
  __m256 c21 = _mm256_loadu_ps(c + 2 * ldc + 8);
  __m256 c30 = _mm256_loadu_ps(c + 3 * ldc);
  __m256 c31 = _mm256_loadu_ps(c + 3 * ldc + 8);
  for (std::size_t p = 0; p < k; ++p) {
    const __m256 b0 = _mm256_loadu_ps(b + p * ldb);
    const __m256 b1 = _mm256_loadu_ps(b + p * ldb + 8);
    __m256 av = _mm256_broadcast_ss(a + p);
    c00 = _mm256_add_ps(c00, _mm256_mul_ps(av, b0));
    c01 = _mm256_add_ps(c01, _mm256_mul_ps(av, b1));
    av = _mm256_broadcast_ss(a + lda + p);
    c10 = _mm256_add_ps(c10, _mm256_mul_ps(av, b0));
    c11 = _mm256_add_ps(c11, _mm256_mul_ps(av, b1));
    av = _mm256_broadcast_ss(a + 2 * lda + p);
    c20 = _mm256_add_ps(c20, _mm256_mul_ps(av, b0));
    c21 = _mm256_add_ps(c21, _mm256_mul_ps(av, b1));
    av = _mm256_broadcast_ss(a + 3 * lda + p);
    c30 = _mm256_add_ps(c30, _mm256_mul_ps(av, b0));
    c31 = _mm256_add_ps(c31, _mm256_mul_ps(av, b1));
  }
  _mm256_storeu_ps(c, c00);
  _mm256_storeu_ps(c + 8, c01);
  _mm256_storeu_ps(c + ldc, c10);
  _mm256_storeu_ps(c + ldc + 8, c11);
  _mm256_storeu_ps(c + 2 * ldc, c20);
  _mm256_storeu_ps(c + 2 * ldc + 8, c21);
  _mm256_storeu_ps(c + 3 * ldc, c30);
  _mm256_storeu_ps(c + 3 * ldc + 8, c31);
}

inline void tile_1x8(std::size_t k, const float* a, const float* b,
                     std::size_t ldb, float* c) {
  __m256 acc = _mm256_loadu_ps(c);
  for (std::size_t p = 0; p < k; ++p) {
    acc = _mm256_add_ps(
        acc, _mm256_mul_ps(_mm256_broadcast_ss(a + p),
                           _mm256_loadu_ps(b + p * ldb)));
  }
  _mm256_storeu_ps(c, acc);
}

inline void tile_1xr(std::size_t r, std::size_t k, const float* a,
                     const float* b, std::size_t ldb, float* c) {
  for (std::size_t j = 0; j < r; ++j) {
    float acc = c[j];
    for (std::size_t p = 0; p < k; ++p) acc = acc + a[p] * b[p * ldb + j];
    c[j] = acc;
  }
}

// Column panel wide enough to keep a slab of B resident in L1/L2.
constexpr std::size_t kPanel = 256;

}  // namespace

void gemm_acc(std::size_t m, std::size_t n, std::size_t k, const float* a,
              std::size_t lda, const float* b, std::size_t ldb, float* c,
              std::size_t ldc) {
  for (std::size_t j0 = 0; j0 < n; j0 += kPanel) {
    const std::size_t jn = (n - j0 < kPanel) ? n - j0 : kPanel;
    const std::size_t j16 = jn / 16 * 16;
    const std::size_t j8 = jn / 8 * 8;
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
      const float* ai = a + i * lda;
      float* ci = c + i * ldc + j0;
      for (std::size_t j = 0; j < j16; j += 16) {
        tile_4x16(k, ai, lda, b + j0 + j, ldb, ci + j, ldc);
      }
      for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t j = j16; j < j8; j += 8) {
          tile_1x8(k, ai + r * lda, b + j0 + j, ldb, ci + r * ldc + j);
        }
        tile_1xr(jn - j8, k, ai + r * lda, b + j0 + j8, ldb,
                 ci + r * ldc + j8);
      }
    }
    for (; i < m; ++i) {
      const float* ai = a + i * lda;
      float* ci = c + i * ldc + j0;
      for (std::size_t j = 0; j < j8; j += 8) {
        tile_1x8(k, ai, b + j0 + j, ldb, ci + j);
      }
      tile_1xr(jn - j8, k, ai, b + j0 + j8, ldb, ci + j8);
    }
  }
}

void axpy(std::size_t n, float alpha, const float* x, float* y) {
  const __m256 av = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(y + i),
                                          _mm256_mul_ps(av,
                                                        _mm256_loadu_ps(x + i))));
  }
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

}  // namespace lalic::simd::avx2
