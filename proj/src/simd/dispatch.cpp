// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cstdlib>
#include <string>

#include "lalic/error.hpp"
#include "lalic/simd/kernels.hpp"

namespace lalic::simd {

const KernelTable& scalar_table();

namespace {

#if defined(LALIC_HAVE_AVX2)
const KernelTable& avx2_table() {
  static const KernelTable table{Isa::kAvx2, &avx2::gemm_acc, &avx2::axpy};
  return table;
}
#endif

const KernelTable* initial_table() {
  Isa isa = best_isa();
  if (const char* env = std::getenv("LALIC_ISA")) {
    const std::string name(env);
    if (name == "scalar") {
      isa = Isa::kScalar;
    } else if (name == "avx2" && isa_available(Isa::kAvx2)) {
      isa = Isa::kAvx2;
    }
  }
  return &kernel_table(isa);
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{initial_table()};
  return slot;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return true;
    case Isa::kAvx2:
#if defined(LALIC_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Isa best_isa() {
  return isa_available(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar;
}

const KernelTable& kernel_table(Isa isa) {
  check_arg(isa_available(isa), "kernel ISA " + std::string(to_string(isa)) +
                                    " is not available on this CPU");
#if defined(LALIC_HAVE_AVX2)
  if (isa == Isa::kAvx2) return avx2_table();
#endif
  return scalar_table();
}

const KernelTable& active() {
  return *active_slot().load(std::memory_order_relaxed);
}

void set_active(Isa isa) {
  active_slot().store(&kernel_table(isa), std::memory_order_relaxed);
}

}  // namespace lalic::simd
