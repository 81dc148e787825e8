// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lalic/simd/kernels.hpp"

namespace lalic::simd {
namespace {

void gemm_acc_f32(std::size_t m, std::size_t n, std::size_t k, const float* a,
                  std::size_t lda, const float* b, std::size_t ldb, float* c,
                  std::size_t ldc) {
  scalar::gemm_acc(m, n, k, a, lda, b, ldb, c, ldc);
}

void axpy_f32(std::size_t n, float alpha, const float* x, float* y) {
  scalar::axpy(n, alpha, x, y);
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::kScalar, &gemm_acc_f32, &axpy_f32};
  return table;
}

}  // namespace lalic::simd
