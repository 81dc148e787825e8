// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

// lalic: compress / decompress / eval / bench / selftest / init-weights.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lalic/bench.hpp"
#include "lalic/error.hpp"
#include "lalic/pipeline.hpp"
#include "lalic/selftest.hpp"
#include "lalic/simd/kernels.hpp"
#include "lalic/weights.hpp"
#include "lalic/wkv.hpp"

namespace {

using namespace lalic;

struct ModelOptions {
  std::string weights;
  std::uint64_t seed = 0;
  std::string config;
  bool f64 = false;
};

void add_model_options(CLI::App* cmd, ModelOptions& o) {
  cmd->add_option("--weights", o.weights, "Weight file (.lalw)");
  cmd->add_option("--seed", o.seed, "Seed for synthetic weights (default 0)");
  cmd->add_option("--config", o.config, "Model config JSON");
  cmd->add_flag("--f64", o.f64, "Run the model in 64-bit floating point");
}

WeightStore load_model(const ModelOptions& o) {
  std::optional<ModelConfig> cfg;
  if (!o.config.empty()) cfg = ModelConfig::from_json_file(o.config);
  if (!o.weights.empty()) return load_weights(o.weights, cfg ? &*cfg : nullptr);
  return init_weights(cfg.value_or(ModelConfig::defaults()), o.seed);
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

void print_report(const RdReport& r, double est_bits) {
  std::printf("bpp            %.6f\n", r.bpp);
  if (r.psnr == kPsnrIdentical) {
    std::printf("psnr_db        inf\n");
  } else {
    std::printf("psnr_db        %.4f\n", r.psnr);
  }
  std::printf("mse_255        %.6f\n", r.mse);
  if (est_bits >= 0) std::printf("est_bits       %.1f\n", est_bits);
  std::printf("actual_bits    %.0f\n", r.actual_bits);
  std::printf("lambda         %.4f\n", r.lambda);
  std::printf("loss           %.4f\n", r.loss);
}

std::vector<std::size_t> parse_sizes(const std::string& list) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t end = std::min(list.find(',', start), list.size());
    const std::string item = list.substr(start, end - start);
    if (!item.empty()) {
      try {
        out.push_back(std::stoul(item));
      } catch (const std::exception&) {
        fail(ErrorKind::kInvalidArgument, "bad resolution '" + item + "'");
      }
    }
    start = end + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear-attention learned image codec"};
  app.require_subcommand(1);

  ModelOptions model;
  double lambda = kLambdaPresets[2];
  int quality = 0;
  auto add_lambda = [&](CLI::App* cmd) {
    cmd->add_option("--lambda", lambda, "Rate-distortion multiplier for the reported loss")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--quality", quality, "Pick lambda from the presets 1..6")
        ->check(CLI::Range(1, 6));
  };

  std::string in_path, out_path, recon_path, stream_path;
  auto* compress = app.add_subcommand("compress", "Encode a PPM image");
  compress->add_option("input", in_path, "Input image (PPM P6)")->required();
  compress->add_option("output", out_path, "Output bitstream")->required();
  add_model_options(compress, model);
  add_lambda(compress);

  auto* decompress = app.add_subcommand("decompress", "Decode a bitstream to PPM");
  decompress->add_option("input", in_path, "Input bitstream")->required();
  decompress->add_option("output", out_path, "Output image (PPM P6)")->required();
  add_model_options(decompress, model);

  double bits = -1;
  auto* eval = app.add_subcommand("eval", "Rate-distortion report for a reconstruction");
  eval->add_option("original", in_path, "Original image")->required();
  eval->add_option("reconstruction", recon_path, "Reconstructed image")->required();
  auto* bits_opt = eval->add_option("--bits", bits, "Coded bits");
  eval->add_option("--bitstream", stream_path, "Take the coded bits from this stream")
      ->excludes(bits_opt);
  add_lambda(eval);

  std::string resolutions = "256,384,512,768,1024";
  std::vector<std::string> mechanisms;
  bool time_scans = false;
  auto* bench_cmd = app.add_subcommand("bench", "Attention op counts vs resolution");
  bench_cmd->add_option("--resolutions", resolutions, "Comma-separated square sides");
  bench_cmd->add_option("--mechanisms", mechanisms,
                        "AFT, AFT+Shift, BiWKV+Shift, WindowAttention, SelectiveScan, "
                        "SelectiveScan2D (default: all)")
      ->delimiter(',');
  bench_cmd->add_flag("--time", time_scans, "Also time the BiWKV scans");
  bench_cmd->add_option("--config", model.config, "Model config JSON");

  bool corrupt = false;
  auto* selftest_cmd = app.add_subcommand("selftest", "Run the built-in oracle suites");
  selftest_cmd->add_flag("--f64", model.f64, "64-bit kernels and pipeline");
  selftest_cmd->add_flag("--inject-corruption", corrupt,
                         "Flip a byte of the codec suite's symbol stream");
  selftest_cmd->add_option("--seed", model.seed, "Suite seed");

  auto* init_cmd = app.add_subcommand("init-weights", "Write seeded synthetic weights");
  init_cmd->add_option("output", out_path, "Output weight file")->required();
  init_cmd->add_option("--seed", model.seed, "Seed (default 0)");
  init_cmd->add_option("--config", model.config, "Model config JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_code(ErrorKind::kInvalidArgument);
  }
  if (quality > 0) lambda = kLambdaPresets[std::size_t(quality - 1)];

  try {
    const Precision precision = model.f64 ? Precision::kF64 : Precision::kF32;
    if (*compress) {
      const auto start = std::chrono::steady_clock::now();
      const Image img = read_ppm(in_path);
      const Codec codec(load_model(model), precision);
      const CompressResult res = codec.compress(img);
      write_file(out_path, res.bytes);
      const double payload_bits = 8.0 * double(res.header.payload_size());
      const RdReport r = eval_rd(img, res.reconstruction, payload_bits, lambda);
      std::printf("image          %zux%zu (padded %ux%u)\n", img.width, img.height,
                  res.header.padded_width, res.header.padded_height);
      std::printf("bytes          %zu (header %zu)\n", res.bytes.size(),
                  res.header.encoded_size());
      print_report(r, res.estimated_y_bits + res.estimated_z_bits);
      std::printf("kernels        %s\n", std::string(simd::to_string(simd::active().isa)).c_str());
      std::printf("seconds        %.2f\n", seconds_since(start));
    } else if (*decompress) {
      const auto start = std::chrono::steady_clock::now();
      const std::vector<std::uint8_t> bytes = read_file(in_path);
      const Codec codec(load_model(model), precision);
      const DecompressResult res = codec.decompress(bytes);
      write_ppm(out_path, res.image);
      std::printf("image          %zux%zu\n", res.image.width, res.image.height);
      std::printf("seconds        %.2f\n", seconds_since(start));
    } else if (*eval) {
      const Image a = read_ppm(in_path), b = read_ppm(recon_path);
      if (!stream_path.empty()) {
        bits = 8.0 * double(parse_bitstream(read_file(stream_path)).header.payload_size());
      }
      check_arg(bits >= 0, "eval needs --bits or --bitstream");
      print_report(eval_rd(a, b, bits, lambda), -1.0);
    } else if (*bench_cmd) {
      const ModelConfig cfg = model.config.empty() ? ModelConfig::defaults()
                                                   : ModelConfig::from_json_file(model.config);
      std::vector<wkv::Mechanism> mechs;
      if (mechanisms.empty()) {
        mechs.assign(std::begin(wkv::kAllMechanisms), std::end(wkv::kAllMechanisms));
      } else {
        for (const auto& m : mechanisms) mechs.push_back(wkv::parse_mechanism(m));
      }
      const auto sizes = parse_sizes(resolutions);
      std::fputs(bench(cfg, sizes, mechs, time_scans).format().c_str(), stdout);
    } else if (*selftest_cmd) {
      const auto results = selftest({model.f64, corrupt, model.seed});
      bool ok = true;
      for (const auto& r : results) {
        std::printf("%-20s %s  %s (%.2fs)\n", r.name.c_str(), r.passed ? "PASS" : "FAIL",
                    r.detail.c_str(), r.seconds);
        ok = ok && r.passed;
      }
      return ok ? 0 : 6;
    } else if (*init_cmd) {
      const ModelConfig cfg = model.config.empty() ? ModelConfig::defaults()
                                                   : ModelConfig::from_json_file(model.config);
      const WeightStore store = init_weights(cfg, model.seed);
      save_weights(store, out_path);
      std::printf("parameters     %llu\n", static_cast<unsigned long long>(store.parameter_count()));
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "lalic: %s error: %s\n", std::string(to_string(e.kind())).c_str(),
                 e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "lalic: %s\n", e.what());
    return exit_code(ErrorKind::kIo);
  }
  return 0;
}
