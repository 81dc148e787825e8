// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "lalic/tensor.hpp"

namespace lalic::codec {

inline constexpr int kSymbolMin = -127;
inline constexpr int kSymbolMax = 128;
inline constexpr std::size_t kAlphabetSize = kSymbolMax - kSymbolMin + 1;
inline constexpr std::uint32_t kPrecisionBits = 16;
inline constexpr std::uint32_t kTotalFrequency = 1u << kPrecisionBits;
inline constexpr double kSigmaMin = 0.04;
inline constexpr double kSigmaMax = 256.0;

/// Standard normal CDF.
double normal_cdf(double x);

/// Mass of integer `symbol` under N(mu, sigma^2) discretized to unit bins
/// centred on the integers; kSymbolMin and kSymbolMax absorb the tails.
/// sigma outside [kSigmaMin, kSigmaMax] is rejected.
double gaussian_pmf(int symbol, double mu, double sigma);

/// Saturates to the coding alphabet.
constexpr int clamp_symbol(long long v) {
  return v < kSymbolMin ? kSymbolMin : (v > kSymbolMax ? kSymbolMax : int(v));
}

/// Cumulative frequency table over the alphabet with total 2^16 and every
/// symbol at frequency >= 1.
class QuantizedCdf {
 public:
  /// cumulative[i] is the start of symbol kSymbolMin + i; cumulative[256]
  /// is 2^16.
  const std::array<std::uint32_t, kAlphabetSize + 1>& table() const {
    return cumulative_;
  }

  std::uint32_t start(int symbol) const { return cumulative_[index(symbol)]; }
  std::uint32_t frequency(int symbol) const {
    const std::size_t i = index(symbol);
    return cumulative_[i + 1] - cumulative_[i];
  }
  double probability(int symbol) const {
    return double(frequency(symbol)) / double(kTotalFrequency);
  }
  /// Symbol whose interval contains `target` (< 2^16).
  int symbol_at(std::uint32_t target) const;

  friend bool operator==(const QuantizedCdf&, const QuantizedCdf&) = default;

 private:
  friend QuantizedCdf build_cdf(double mu, double sigma);
  static std::size_t index(int symbol);

  std::array<std::uint32_t, kAlphabetSize + 1> cumulative_{};
};

/// Frequencies 1 + floor(p * (2^16 - 256)); the leftover units go to the
/// largest fractional remainders, ties to the lower symbol.
QuantizedCdf build_cdf(double mu, double sigma);

/// Byte-oriented range coder: 64-bit low (33 bits live, the top one is the
/// pending carry), 32-bit range, renormalize one byte at a time whenever
/// range < 2^24, with carries resolved in the encoder through a cached byte
/// and a run of pending 0xFF bytes. The decoder never sees a carry.
///
/// Stream layout: the encoder's output bytes in order, most significant
/// first. finish() shifts out five bytes; the first byte of every stream is
/// 0x00. A stream of n symbols with r renormalizations is exactly 5 + r
/// bytes, and the decoder consumes exactly that many.
class RangeEncoder {
 public:
  /// Clamps to the alphabet before coding.
  void encode(int symbol, const QuantizedCdf& cdf);
  std::vector<std::uint8_t> finish();

 private:
  void shift_low();

  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint8_t cache_ = 0;
  std::uint64_t cache_size_ = 1;
  std::vector<std::uint8_t> out_;
};

class RangeDecoder {
 public:
  /// Reads the 5-byte preamble; too-short input is a corruption error.
  explicit RangeDecoder(std::span<const std::uint8_t> bytes);

  int decode(const QuantizedCdf& cdf);

  /// Throws kCorruption unless every byte was consumed.
  void finish() const;

 private:
  std::uint8_t next_byte();

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::uint32_t code_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
};

/// One CDF per symbol; symbols outside the alphabet are rejected.
std::vector<std::uint8_t> encode(std::span<const int> symbols,
                                 std::span<const QuantizedCdf> cdfs);
std::vector<int> decode(std::span<const std::uint8_t> bytes,
                        std::span<const QuantizedCdf> cdfs);

/// Ideal code length under the quantized tables, in bits.
double estimate_rate(std::span<const int> symbols,
                     std::span<const QuantizedCdf> cdfs);
double symbol_bits(int symbol, const QuantizedCdf& cdf);

/// Position-independent per-channel Gaussian model for the hyper latent.
struct FactorizedPrior {
  std::vector<double> mean;
  std::vector<double> scale;  // clamped to [kSigmaMin, kSigmaMax]

  /// Builds from per-channel means and log-scales.
  static FactorizedPrior from_log_scale(std::span<const float> mean,
                                        std::span<const float> log_scale);
};

/// round-half-away-from-zero, saturated to the alphabet.
Tensor quantize_hyper(const Tensor& z);

/// Codes ẑ (integer valued, (N,h,w)) channel by channel in raster order.
std::vector<std::uint8_t> encode_hyper(const Tensor& z_hat,
                                       const FactorizedPrior& prior);
Tensor decode_hyper(std::span<const std::uint8_t> bytes,
                    const FactorizedPrior& prior, std::size_t height,
                    std::size_t width);
double estimate_hyper_rate(const Tensor& z_hat, const FactorizedPrior& prior);

}  // namespace lalic::codec
