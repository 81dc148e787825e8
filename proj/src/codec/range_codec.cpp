// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lalic/range_codec.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lalic/error.hpp"

namespace lalic::codec {
namespace {

constexpr std::uint32_t kTop = 1u << 24;

}  // namespace

void RangeEncoder::encode(int symbol, const QuantizedCdf& cdf) {
  const int s = clamp_symbol(symbol);
  const std::uint32_t r = range_ >> kPrecisionBits;
  low_ += std::uint64_t(r) * cdf.start(s);
  range_ = r * cdf.frequency(s);
  while (range_ < kTop) {
    range_ <<= 8;
    shift_low();
  }
}

void RangeEncoder::shift_low() {
  if (std::uint32_t(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    const std::uint8_t carry = std::uint8_t(low_ >> 32);
    std::uint8_t pending = cache_;
    do {
      out_.push_back(std::uint8_t(pending + carry));
      pending = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = std::uint8_t(low_ >> 24);
  }
  ++cache_size_;
  low_ = (low_ & 0x00FFFFFFu) << 8;
}

std::vector<std::uint8_t> RangeEncoder::finish() {
  for (int i = 0; i < 5; ++i) shift_low();
  return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const std::uint8_t> bytes) : bytes_(bytes) {
  if (bytes_.size() < 5) {
    fail(ErrorKind::kCorruption, "range-coded segment shorter than 5 bytes");
  }
  if (bytes_[0] != 0) {
    fail(ErrorKind::kCorruption, "range-coded segment has a nonzero lead byte");
  }
  for (int i = 0; i < 5; ++i) code_ = (code_ << 8) | next_byte();
}

std::uint8_t RangeDecoder::next_byte() {
  if (pos_ >= bytes_.size()) {
    fail(ErrorKind::kCorruption, "range-coded segment underrun");
  }
  return bytes_[pos_++];
}

int RangeDecoder::decode(const QuantizedCdf& cdf) {
  const std::uint32_t r = range_ >> kPrecisionBits;
  const std::uint32_t target = code_ / r;
  if (target >= kTotalFrequency) {
    fail(ErrorKind::kCorruption, "range-coded segment is inconsistent");
  }
  const int s = cdf.symbol_at(target);
  code_ -= r * cdf.start(s);
  range_ = r * cdf.frequency(s);
  while (range_ < kTop) {
    code_ = (code_ << 8) | next_byte();
    range_ <<= 8;
  }
  return s;
}

void RangeDecoder::finish() const {
  if (pos_ != bytes_.size()) {
    fail(ErrorKind::kCorruption,
         "range-coded segment has " + std::to_string(bytes_.size() - pos_) +
             " unread bytes");
  }
}

std::vector<std::uint8_t> encode(std::span<const int> symbols,
                                 std::span<const QuantizedCdf> cdfs) {
  check_arg(symbols.size() == cdfs.size(), "encode: symbol and cdf counts differ");
  RangeEncoder enc;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    check_arg(symbols[i] >= kSymbolMin && symbols[i] <= kSymbolMax,
              "encode: symbol " + std::to_string(symbols[i]) +
                  " outside the alphabet [-127,128]");
    enc.encode(symbols[i], cdfs[i]);
  }
  return enc.finish();
}

std::vector<int> decode(std::span<const std::uint8_t> bytes,
                        std::span<const QuantizedCdf> cdfs) {
  RangeDecoder dec(bytes);
  std::vector<int> out;
  out.reserve(cdfs.size());
  for (const auto& cdf : cdfs) out.push_back(dec.decode(cdf));
  dec.finish();
  return out;
}

FactorizedPrior FactorizedPrior::from_log_scale(std::span<const float> mean,
                                                std::span<const float> log_scale) {
  check_arg(mean.size() == log_scale.size(),
            "factorized prior: mean/scale lengths differ");
  FactorizedPrior p;
  for (std::size_t c = 0; c < mean.size(); ++c) {
    p.mean.push_back(mean[c]);
    p.scale.push_back(
        std::clamp(std::exp(double(log_scale[c])), kSigmaMin, kSigmaMax));
  }
  return p;
}

Tensor quantize_hyper(const Tensor& z) {
  Tensor out = z;
  for (float& v : out.values()) v = float(clamp_symbol(std::llround(v)));
  return out;
}

namespace {

std::vector<QuantizedCdf> prior_tables(const FactorizedPrior& prior) {
  std::vector<QuantizedCdf> tables;
  tables.reserve(prior.mean.size());
  for (std::size_t c = 0; c < prior.mean.size(); ++c) {
    tables.push_back(build_cdf(prior.mean[c], prior.scale[c]));
  }
  return tables;
}

void check_hyper(const Tensor& z_hat, const FactorizedPrior& prior) {
  check_arg(z_hat.rank() == 3 && z_hat.dim(0) == prior.mean.size(),
            "hyper latent " + to_string(z_hat.shape()) + " does not match a " +
                std::to_string(prior.mean.size()) + "-channel prior");
}

}  // namespace

std::vector<std::uint8_t> encode_hyper(const Tensor& z_hat,
                                       const FactorizedPrior& prior) {
  check_hyper(z_hat, prior);
  const auto tables = prior_tables(prior);
  const std::size_t plane = z_hat.dim(1) * z_hat.dim(2);
  RangeEncoder enc;
  for (std::size_t c = 0; c < tables.size(); ++c) {
    for (std::size_t i = 0; i < plane; ++i) {
      enc.encode(int(z_hat[c * plane + i]), tables[c]);
    }
  }
  return enc.finish();
}

Tensor decode_hyper(std::span<const std::uint8_t> bytes,
                    const FactorizedPrior& prior, std::size_t height,
                    std::size_t width) {
  const auto tables = prior_tables(prior);
  Tensor out({tables.size(), height, width});
  const std::size_t plane = height * width;
  RangeDecoder dec(bytes);
  for (std::size_t c = 0; c < tables.size(); ++c) {
    for (std::size_t i = 0; i < plane; ++i) {
      out[c * plane + i] = float(dec.decode(tables[c]));
    }
  }
  dec.finish();
  return out;
}

double estimate_hyper_rate(const Tensor& z_hat, const FactorizedPrior& prior) {
  check_hyper(z_hat, prior);
  const auto tables = prior_tables(prior);
  const std::size_t plane = z_hat.dim(1) * z_hat.dim(2);
  double bits = 0.0;
  for (std::size_t c = 0; c < tables.size(); ++c) {
    for (std::size_t i = 0; i < plane; ++i) {
      bits += symbol_bits(int(z_hat[c * plane + i]), tables[c]);
    }
  }
  return bits;
}

}  // namespace lalic::codec
