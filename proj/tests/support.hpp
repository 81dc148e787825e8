// Shared helpers for the unit tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>

#include "lalic/bytes.hpp"
#include "lalic/rng.hpp"
#include "lalic/tensor.hpp"

namespace testing {

template <typename Real>
lalic::BasicTensor<Real> random_tensor(lalic::Shape shape, lalic::Rng& rng,
                                       double lo = -1.0, double hi = 1.0) {
  lalic::BasicTensor<Real> t(std::move(shape));
  for (Real& v : t.values()) v = Real(rng.uniform(lo, hi));
  return t;
}

template <typename Real>
bool bits_equal(const lalic::BasicTensor<Real>& a, const lalic::BasicTensor<Real>& b) {
  return a.shape() == b.shape() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(Real)) == 0;
}

template <typename A, typename B>
double max_abs_diff(const lalic::BasicTensor<A>& a, const lalic::BasicTensor<B>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(double(a[i]) - double(b[i])));
  }
  return m;
}

template <typename Real>
double max_abs(const lalic::BasicTensor<Real>& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(double(a[i])));
  return m;
}

/// FNV-1a 64 over the raw bytes of the values.
template <typename Real>
std::uint64_t checksum(const lalic::BasicTensor<Real>& t) {
  return lalic::fnv1a64(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(t.data()), t.size() * sizeof(Real)));
}

}  // namespace testing
