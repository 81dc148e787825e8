// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lalic/pipeline.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "lalic/entropy_model.hpp"
#include "lalic/error.hpp"
#include "lalic/ops.hpp"
#include "lalic/range_codec.hpp"
#include "lalic/transforms.hpp"

namespace lalic {

RdReport eval_rd(const Image& original, const Image& reconstruction,
                 double bits, double lambda) {
  check_arg(original.width == reconstruction.width &&
                original.height == reconstruction.height &&
                original.rgb.size() == reconstruction.rgb.size(),
            "eval: image extents differ (" + std::to_string(original.width) + "x" +
                std::to_string(original.height) + " vs " +
                std::to_string(reconstruction.width) + "x" +
                std::to_string(reconstruction.height) + ")");
  check_arg(!original.rgb.empty(), "eval: empty image");
  double sse = 0.0;
  for (std::size_t i = 0; i < original.rgb.size(); ++i) {
    const double d = double(original.rgb[i]) - double(reconstruction.rgb[i]);
    sse += d * d;
  }
  RdReport r;
  r.mse = sse / double(original.rgb.size());
  r.psnr = r.mse == 0.0 ? kPsnrIdentical : 10.0 * std::log10(255.0 * 255.0 / r.mse);
  r.bpp = bits / double(original.width * original.height);
  r.actual_bits = bits;
  r.lambda = lambda;
  // lambda * 255^2 * MSE on [0,1] pixels is lambda * MSE on [0,255].
  r.loss = lambda * r.mse + bits;
  return r;
}

namespace {

template <typename Real>
struct Model {
  Transforms<Real> transforms;
  entropy::EntropyModel<Real> entropy;
};

std::pair<WeightSource, std::uint64_t> weight_identity(const WeightStore& store) {
  if (store.file_checksum()) return {WeightSource::kFile, *store.file_checksum()};
  if (store.seed()) return {WeightSource::kSeed, *store.seed()};
  fail(ErrorKind::kInvalidArgument, "weights carry neither a seed nor a file checksum");
}

template <typename Real>
BasicTensor<Real> quantize_integer(const BasicTensor<Real>& z) {
  BasicTensor<Real> out = z;
  for (Real& v : out.values()) {
    const Real r = std::round(v);
    v = Real(codec::clamp_symbol(r < Real(-1e9) ? -1000000000LL
                                 : r > Real(1e9) ? 1000000000LL
                                                 : static_cast<long long>(r)));
  }
  return out;
}

}  // namespace

struct Codec::Impl {
  WeightStore store;
  Precision precision;
  codec::FactorizedPrior prior;
  std::unique_ptr<Model<float>> f32;
  std::unique_ptr<Model<double>> f64;

  Impl(WeightStore s, Precision p) : store(std::move(s)), precision(p) {
    store.validate();
    prior = codec::FactorizedPrior::from_log_scale(store.get("prior.mean").values(),
                                                   store.get("prior.log_scale").values());
    if (p == Precision::kF64) {
      f64 = std::make_unique<Model<double>>(Model<double>{
          Transforms<double>::from_store(store),
          entropy::EntropyModel<double>::from_store(store)});
    } else {
      f32 = std::make_unique<Model<float>>(Model<float>{
          Transforms<float>::from_store(store),
          entropy::EntropyModel<float>::from_store(store)});
    }
  }

  template <typename Real>
  CompressResult compress(const Model<Real>& m, const Image& image, bool reconstruct) const {
    check_arg(image.width > 0 && image.height > 0 &&
                  image.rgb.size() == image.width * image.height * 3,
              "compress: empty or inconsistent image");
    const ModelConfig& cfg = store.config();
    const std::size_t pw = padded_extent(image.width), ph = padded_extent(image.height);

    CompressResult res;
    BitstreamHeader& h = res.header;
    h.width = std::uint32_t(image.width);
    h.height = std::uint32_t(image.height);
    h.padded_width = std::uint32_t(pw);
    h.padded_height = std::uint32_t(ph);
    h.config_digest = cfg.digest();
    std::tie(h.weight_source, h.weight_id) = weight_identity(store);
    h.precision = precision;

    const BasicTensor<Real> x =
        ops::pad_replicate(image_to_tensor<Real>(image), ph, pw);
    const BasicTensor<Real> y = m.transforms.analysis(x);
    const BasicTensor<Real> z_hat = quantize_integer(m.transforms.hyper_analysis(y));
    const Tensor z_symbols = z_hat.template cast<float>();

    Bitstream stream;
    stream.z = codec::encode_hyper(z_symbols, prior);
    res.estimated_z_bits = codec::estimate_hyper_rate(z_symbols, prior);
    res.symbol_count = z_symbols.size();

    const BasicTensor<Real> hyper = m.transforms.hyper_synthesis(z_hat);
    const entropy::UnitCoder<Real> coder =
        [&](const entropy::CodingUnit&, std::span<const std::size_t>,
            const entropy::GaussianParams<Real>& params, std::span<int> symbols) {
          codec::RangeEncoder enc;
          for (std::size_t i = 0; i < symbols.size(); ++i) {
            const codec::QuantizedCdf cdf = codec::build_cdf(0.0, double(params.scale[i]));
            enc.encode(symbols[i], cdf);
            res.estimated_y_bits += codec::symbol_bits(symbols[i], cdf);
          }
          res.symbol_count += symbols.size();
          stream.units.push_back(enc.finish());
        };
    const BasicTensor<Real> y_hat =
        m.entropy.run_schedule(entropy::Mode::kEncode, y, hyper, coder);

    stream.header = h;
    res.bytes = serialize_bitstream(stream);
    h.z_bytes = std::uint32_t(stream.z.size());
    for (const auto& u : stream.units) h.unit_bytes.push_back(std::uint32_t(u.size()));
    res.y = y.template cast<double>();
    res.y_hat = y_hat.template cast<double>();
    if (reconstruct) {
      res.reconstruction = tensor_to_image(
          ops::crop(m.transforms.synthesis(y_hat), image.height, image.width));
    }
    return res;
  }

  template <typename Real>
  DecompressResult decompress(const Model<Real>& m,
                              std::span<const std::uint8_t> bytes) const {
    Bitstream s = parse_bitstream(bytes);
    const BitstreamHeader& h = s.header;
    const ModelConfig& cfg = store.config();
    if (h.config_digest != cfg.digest()) {
      fail(ErrorKind::kConfigMismatch,
           "bitstream was produced with a different model configuration");
    }
    const auto [source, id] = weight_identity(store);
    if (h.weight_source != source || h.weight_id != id) {
      fail(ErrorKind::kConfigMismatch,
           std::string("bitstream was produced with different weights (") +
               (h.weight_source == WeightSource::kSeed ? "seed " : "weight file ") +
               std::to_string(h.weight_id) + ")");
    }
    if (h.precision != precision) {
      fail(ErrorKind::kConfigMismatch,
           std::string("bitstream needs ") +
               (h.precision == Precision::kF64 ? "--f64" : "32-bit") + " decoding");
    }
    const std::size_t units = 2 * cfg.chunk_plan.size();
    if (s.units.size() != units) {
      fail(ErrorKind::kCorruption, "bitstream has " + std::to_string(s.units.size()) +
                                       " coding-unit segments, schedule needs " +
                                       std::to_string(units));
    }

    const Tensor z_symbols = codec::decode_hyper(s.z, prior, h.padded_height / 64,
                                                 h.padded_width / 64);
    const BasicTensor<Real> hyper =
        m.transforms.hyper_synthesis(z_symbols.template cast<Real>());
    std::size_t next = 0;
    const entropy::UnitCoder<Real> coder =
        [&](const entropy::CodingUnit&, std::span<const std::size_t>,
            const entropy::GaussianParams<Real>& params, std::span<int> symbols) {
          codec::RangeDecoder dec(s.units[next++]);
          for (std::size_t i = 0; i < symbols.size(); ++i) {
            symbols[i] = dec.decode(codec::build_cdf(0.0, double(params.scale[i])));
          }
          dec.finish();
        };
    const BasicTensor<Real> y_hat =
        m.entropy.run_schedule(entropy::Mode::kDecode, BasicTensor<Real>(), hyper, coder);

    DecompressResult out;
    out.header = h;
    out.y_hat = y_hat.template cast<double>();
    out.image = tensor_to_image(ops::crop(m.transforms.synthesis(y_hat), h.height, h.width));
    return out;
  }
};

Codec::Codec(WeightStore store, Precision precision)
    : impl_(std::make_unique<Impl>(std::move(store), precision)) {}
Codec::~Codec() = default;
Codec::Codec(Codec&&) noexcept = default;
Codec& Codec::operator=(Codec&&) noexcept = default;

const WeightStore& Codec::weights() const { return impl_->store; }
Precision Codec::precision() const { return impl_->precision; }

CompressResult Codec::compress(const Image& image, bool reconstruct) const {
  return impl_->f64 ? impl_->compress(*impl_->f64, image, reconstruct)
                    : impl_->compress(*impl_->f32, image, reconstruct);
}

DecompressResult Codec::decompress(std::span<const std::uint8_t> bytes) const {
  return impl_->f64 ? impl_->decompress(*impl_->f64, bytes)
                    : impl_->decompress(*impl_->f32, bytes);
}

}  // namespace lalic
