// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string_view>

// Inner-loop kernels with a scalar reference and vectorized variants picked
// at runtime. Every variant vectorizes across independent output elements
// only and applies the same rounded multiply-then-add sequence per element,
// so all variants are bit-identical to the scalar reference. That property
// is what lets an encoder and decoder on different ISAs agree on entropy
// parameters.

namespace lalic::simd {

enum class Isa { kScalar, kAvx2 };

std::string_view to_string(Isa isa);

/// C[m][n] += sum_k A[m][k] * B[k][n], k ascending, one rounded multiply
/// and one rounded add per step. Row strides are in elements.
using GemmAccFn = void (*)(std::size_t m, std::size_t n, std::size_t k,
                           const float* a, std::size_t lda, const float* b,
                           std::size_t ldb, float* c, std::size_t ldc);

/// y[i] += alpha * x[i]
using AxpyFn = void (*)(std::size_t n, float alpha, const float* x, float* y);

struct KernelTable {
  Isa isa;
  GemmAccFn gemm_acc;
  AxpyFn axpy;
};

bool isa_available(Isa isa);
Isa best_isa();

const KernelTable& kernel_table(Isa isa);

/// Active table. Defaults to best_isa(); the LALIC_ISA environment variable
/// ("scalar" or "avx2") overrides the default at first use.
const KernelTable& active();

/// Switches the active table. Not synchronized with concurrent kernel calls.
void set_active(Isa isa);

namespace scalar {

template <typename Real>
void gemm_acc(std::size_t m, std::size_t n, std::size_t k, const Real* a,
              std::size_t lda, const Real* b, std::size_t ldb, Real* c,
              std::size_t ldc) {
  for (std::size_t i = 0; i < m; ++i) {
    Real* crow = c + i * ldc;
    for (std::size_t p = 0; p < k; ++p) {
      const Real alpha = a[i * lda + p];
      const Real* brow = b + p * ldb;
      for (std::size_t j = 0; j < n; ++j) crow[j] = crow[j] + alpha * brow[j];
    }
  }
}

template <typename Real>
void axpy(std::size_t n, Real alpha, const Real* x, Real* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

}  // namespace scalar

#if defined(LALIC_HAVE_AVX2)
namespace avx2 {
void gemm_acc(std::size_t m, std::size_t n, std::size_t k, const float* a,
              std::size_t lda, const float* b, std::size_t ldb, float* c,
              std::size_t ldc);
void axpy(std::size_t n, float alpha, const float* x, float* y);
}  // namespace avx2
#endif

/// Type-generic entry points used by the tensor ops: float goes through the
/// active table, double always uses the scalar reference.
inline void gemm_acc(std::size_t m, std::size_t n, std::size_t k,
                     const float* a, std::size_t lda, const float* b,
                     std::size_t ldb, float* c, std::size_t ldc) {
  active().gemm_acc(m, n, k, a, lda, b, ldb, c, ldc);
}
inline void gemm_acc(std::size_t m, std::size_t n, std::size_t k,
                     const double* a, std::size_t lda, const double* b,
                     std::size_t ldb, double* c, std::size_t ldc) {
  scalar::gemm_acc(m, n, k, a, lda, b, ldb, c, ldc);
}
inline void axpy(std::size_t n, float alpha, const float* x, float* y) {
  active().axpy(n, alpha, x, y);
}
inline void axpy(std::size_t n, double alpha, const double* x, double* y) {
  scalar::axpy(n, alpha, x, y);
}

}  // namespace lalic::simd
