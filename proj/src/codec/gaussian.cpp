// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lalic/error.hpp"
#include "lalic/range_codec.hpp"

namespace lalic::codec {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// Upper tail 1 - Phi(x), accurate for large x.
double normal_sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

// Phi(b) - Phi(a) for a < b, evaluated on the side of the mean where the
// subtraction does not cancel.
double interval_mass(double a, double b) {
  if (a >= 0.0) return normal_sf(a) - normal_sf(b);
  if (b <= 0.0) return normal_cdf(b) - normal_cdf(a);
  return 1.0 - normal_cdf(a) - normal_sf(b);
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double gaussian_pmf(int symbol, double mu, double sigma) {
  if (!(sigma >= kSigmaMin && sigma <= kSigmaMax)) {
    fail(ErrorKind::kInvalidArgument,
         "gaussian_pmf: sigma " + std::to_string(sigma) + " outside [0.04, 256]");
  }
  if (symbol < kSymbolMin || symbol > kSymbolMax) {
    fail(ErrorKind::kInvalidArgument,
         "gaussian_pmf: symbol " + std::to_string(symbol) + " outside the alphabet");
  }
  const double lo = (double(symbol) - mu - 0.5) / sigma;
  const double hi = (double(symbol) - mu + 0.5) / sigma;
  if (symbol == kSymbolMin) return normal_cdf(hi);
  if (symbol == kSymbolMax) return normal_sf(lo);
  return interval_mass(lo, hi);
}

std::size_t QuantizedCdf::index(int symbol) {
  if (symbol < kSymbolMin || symbol > kSymbolMax) {
    fail(ErrorKind::kInvalidArgument,
         "symbol " + std::to_string(symbol) + " outside the alphabet");
  }
  return std::size_t(symbol - kSymbolMin);
}

int QuantizedCdf::symbol_at(std::uint32_t target) const {
  // First entry strictly greater than target, minus one.
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  return kSymbolMin + int(it - cumulative_.begin()) - 1;
}

QuantizedCdf build_cdf(double mu, double sigma) {
  constexpr std::uint32_t kSpare = kTotalFrequency - kAlphabetSize;
  if (!(sigma >= kSigmaMin && sigma <= kSigmaMax)) {
    fail(ErrorKind::kInvalidArgument,
         "build_cdf: sigma " + std::to_string(sigma) + " outside [0.04, 256]");
  }
  // Bin edges s - 0.5 for s in (kSymbolMin, kSymbolMax]; each edge keeps the
  // tail on its own side of the mean, exactly as gaussian_pmf evaluates it.
  std::array<double, kAlphabetSize - 1> edge{}, tail{};
  for (std::size_t j = 0; j + 1 < kAlphabetSize; ++j) {
    edge[j] = (double(kSymbolMin + int(j) + 1) - mu - 0.5) / sigma;
    tail[j] = edge[j] >= 0.0 ? normal_sf(edge[j]) : normal_cdf(edge[j]);
  }
  auto lower = [&](std::size_t j) { return edge[j] >= 0.0 ? 1.0 - tail[j] : tail[j]; };
  std::array<double, kAlphabetSize> mass{};
  double total = 0.0;
  for (std::size_t i = 0; i < kAlphabetSize; ++i) {
    if (i == 0) {
      mass[i] = lower(0);
    } else if (i + 1 == kAlphabetSize) {
      mass[i] = edge[i - 1] >= 0.0 ? tail[i - 1] : 1.0 - tail[i - 1];
    } else {
      const double a = edge[i - 1], b = edge[i];
      if (a >= 0.0) {
        mass[i] = tail[i - 1] - tail[i];
      } else if (b <= 0.0) {
        mass[i] = (b < 0.0 ? tail[i] : normal_cdf(b)) - tail[i - 1];
      } else {
        mass[i] = 1.0 - tail[i - 1] - tail[i];
      }
    }
    total += mass[i];
  }

  std::array<std::uint32_t, kAlphabetSize> freq{};
  std::array<double, kAlphabetSize> remainder{};
  std::uint32_t assigned = 0;
  for (std::size_t i = 0; i < kAlphabetSize; ++i) {
    const double share = mass[i] / total * double(kSpare);
    const double whole = std::floor(share);
    freq[i] = 1 + std::uint32_t(whole);
    remainder[i] = share - whole;
    assigned += std::uint32_t(whole);
  }

  if (assigned < kSpare) {
    std::array<std::uint16_t, kAlphabetSize> order{};
    std::iota(order.begin(), order.end(), std::uint16_t{0});
    const std::size_t extra = kSpare - assigned;
    // The comparator is a strict total order, so the selected set is unique.
    std::nth_element(order.begin(), order.begin() + std::ptrdiff_t(extra),
                     order.end(), [&](std::uint16_t a, std::uint16_t b) {
                       if (remainder[a] != remainder[b]) {
                         return remainder[a] > remainder[b];
                       }
                       return a < b;
                     });
    for (std::size_t j = 0; j < extra; ++j) ++freq[order[j]];
  } else {
    // Rounding pushed the floors past the budget; take units back from the
    // most probable symbols, which can always spare them.
    std::uint32_t excess = assigned - kSpare;
    while (excess > 0) {
      auto it = std::max_element(freq.begin(), freq.end());
      --*it;
      --excess;
    }
  }

  QuantizedCdf cdf;
  cdf.cumulative_[0] = 0;
  for (std::size_t i = 0; i < kAlphabetSize; ++i) {
    cdf.cumulative_[i + 1] = cdf.cumulative_[i] + freq[i];
  }
  return cdf;
}

double symbol_bits(int symbol, const QuantizedCdf& cdf) {
  return -std::log2(cdf.probability(clamp_symbol(symbol)));
}

double estimate_rate(std::span<const int> symbols,
                     std::span<const QuantizedCdf> cdfs) {
  check_arg(symbols.size() == cdfs.size(),
            "estimate_rate: symbol and cdf counts differ");
  double bits = 0.0;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    bits += symbol_bits(symbols[i], cdfs[i]);
  }
  return bits;
}

}  // namespace lalic::codec
