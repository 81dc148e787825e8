#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>

#include "doctest.h"
#include "lalic/bench.hpp"
#include "lalic/bitstream.hpp"
#include "lalic/error.hpp"
#include "lalic/image.hpp"
#include "lalic/pipeline.hpp"
#include "lalic/selftest.hpp"
#include "lalic/weights.hpp"
#include "support.hpp"

#include <sys/wait.h>

using namespace lalic;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::kInvalidArgument;
}

Bitstream sample_stream() {
  Bitstream s;
  s.header.width = 250;
  s.header.height = 130;
  s.header.padded_width = 256;
  s.header.padded_height = 192;
  s.header.config_digest = 0x1122334455667788ull;
  s.header.weight_source = WeightSource::kFile;
  s.header.weight_id = 42;
  s.header.precision = Precision::kF64;
  s.z = {0, 1, 2, 3, 4, 5};
  s.units = {{0, 9, 9, 9, 9}, {0, 1, 1, 1, 1, 1, 1}};
  s.header.z_bytes = 6;
  s.header.unit_bytes = {5, 7};
  return s;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("lalic-test-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

const Codec& tiny_codec() {
  static const Codec codec(init_weights(tiny_config(), 0));
  return codec;
}

}  // namespace

TEST_CASE("bitstream: serialize and parse") {
  const Bitstream s = sample_stream();
  const auto bytes = serialize_bitstream(s);
  CHECK(bytes.size() == s.header.encoded_size() + 6 + 5 + 7);
  CHECK(s.header.encoded_size() == 58);
  CHECK(s.header.payload_size() == 18);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "LALB");
  const Bitstream back = parse_bitstream(bytes);
  CHECK(back.header == s.header);
  CHECK(back.z == s.z);
  CHECK(back.units == s.units);
}

TEST_CASE("bitstream: malformed input") {
  const auto bytes = serialize_bitstream(sample_stream());
  auto with = [&](std::size_t at, std::uint8_t v) {
    auto b = bytes;
    b[at] = v;
    return b;
  };
  CHECK(kind_of([&] { parse_bitstream(with(0, 'X')); }) == ErrorKind::kFormat);
  CHECK(kind_of([&] { parse_bitstream(with(4, 9)); }) == ErrorKind::kFormat);       // version
  CHECK(kind_of([&] { parse_bitstream(with(32, 7)); }) == ErrorKind::kFormat);      // weight source
  CHECK(kind_of([&] { parse_bitstream(with(41, 7)); }) == ErrorKind::kFormat);      // precision
  CHECK(kind_of([&] { parse_bitstream(with(17, 0)); }) == ErrorKind::kCorruption);  // padded < width
  const std::vector<std::uint8_t> cut(bytes.begin(), bytes.end() - 1);
  CHECK(kind_of([&] { parse_bitstream(cut); }) == ErrorKind::kCorruption);
  auto longer = bytes;
  longer.push_back(0);
  CHECK(kind_of([&] { parse_bitstream(longer); }) == ErrorKind::kCorruption);
  CHECK(kind_of([&] { parse_bitstream(std::vector<std::uint8_t>(10, 0)); }) != ErrorKind::kInvalidArgument);
}

TEST_CASE("ppm io") {
  const Image img = test_image(7, 5, 3);
  const auto bytes = encode_ppm(img);
  CHECK(parse_ppm(bytes) == img);
  std::vector<std::uint8_t> bad = bytes;
  bad[1] = '3';
  CHECK(kind_of([&] { parse_ppm(bad); }) == ErrorKind::kFormat);
  const std::string text = "P6\n2 2\n65535\n";
  CHECK(kind_of([&] { parse_ppm({text.begin(), text.end()}); }) == ErrorKind::kFormat);
  CHECK(kind_of([&] { parse_ppm({bytes.begin(), bytes.end() - 2}); }) == ErrorKind::kFormat);
  CHECK(kind_of([&] { read_ppm("/nonexistent/dir/x.ppm"); }) == ErrorKind::kIo);
  CHECK(tensor_to_image(image_to_tensor<double>(img)) == img);
}

TEST_CASE("codec: padding, determinism and round trip") {
  CHECK(padded_extent(250) == 256);
  CHECK(padded_extent(64) == 64);
  CHECK(padded_extent(1) == 64);
  const Image img = test_image(250, 130, 4);
  const CompressResult a = tiny_codec().compress(img);
  CHECK(a.header.width == 250);
  CHECK(a.header.padded_width == 256);
  CHECK(a.header.padded_height == 192);
  CHECK(a.reconstruction.width == 250);
  CHECK(a.reconstruction.height == 130);
  CHECK(tiny_codec().compress(img).bytes == a.bytes);
  const DecompressResult d = tiny_codec().decompress(a.bytes);
  CHECK(d.image == a.reconstruction);
  CHECK(testing::bits_equal(d.y_hat, a.y_hat));
  CHECK(testing::max_abs_diff(a.y_hat, a.y) <= 0.5);
  const double actual = 8.0 * double(a.header.payload_size());
  CHECK(actual >= a.estimated_y_bits + a.estimated_z_bits);
}

TEST_CASE("codec: header checks") {
  const CompressResult a = tiny_codec().compress(test_image(64, 64, 5), false);
  const Codec other_seed(init_weights(tiny_config(), 1));
  CHECK(kind_of([&] { other_seed.decompress(a.bytes); }) == ErrorKind::kConfigMismatch);
  const Codec wide(init_weights(tiny_config(), 0), Precision::kF64);
  CHECK(kind_of([&] { wide.decompress(a.bytes); }) == ErrorKind::kConfigMismatch);
  ModelConfig cfg = tiny_config();
  cfg.context_blocks = 1;
  const Codec other_cfg(init_weights(cfg, 0));
  CHECK(kind_of([&] { other_cfg.decompress(a.bytes); }) == ErrorKind::kConfigMismatch);

  // Flip a payload byte inside the last unit: either the coder notices or the
  // segment framing does; it never decodes silently to a different length.
  auto bad = a.bytes;
  bad[bad.size() - 2] ^= 0xFF;
  try {
    const auto d = tiny_codec().decompress(bad);
    CHECK(d.image.width == 64);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kCorruption);
  }
  const std::vector<std::uint8_t> cut(a.bytes.begin(), a.bytes.end() - 4);
  CHECK(kind_of([&] { tiny_codec().decompress(cut); }) == ErrorKind::kCorruption);
}

TEST_CASE("eval_rd") {
  const Image img = test_image(10, 10, 6);
  const RdReport same = eval_rd(img, img, 1000, 0.01);
  CHECK(same.psnr == kPsnrIdentical);
  CHECK(same.mse == 0.0);
  CHECK(same.bpp == 10.0);
  CHECK(same.loss == 1000.0);

  Image black{10, 10, std::vector<std::uint8_t>(300, 0)}, white = black;
  std::fill(white.rgb.begin(), white.rgb.end(), 255);
  const RdReport far = eval_rd(black, white, 0, kLambdaPresets[0]);
  CHECK(far.mse == 255.0 * 255.0);
  CHECK(far.psnr == doctest::Approx(0.0));
  CHECK(far.loss == doctest::Approx(0.0025 * 65025.0));

  Image one = black;
  one.rgb[0] = 3;  // mse = 9/300
  CHECK(eval_rd(black, one, 0, 1).psnr ==
        doctest::Approx(10 * std::log10(255.0 * 255.0 / (9.0 / 300.0))));
  CHECK(kLambdaPresets.size() == 6);
  CHECK(kLambdaPresets[5] == 0.0483);
  CHECK_THROWS_AS(eval_rd(black, test_image(10, 11, 0), 0, 1), Error);
}

TEST_CASE("bench: op counts scale with pixels") {
  const ModelConfig cfg = ModelConfig::defaults();
  // Hand sum over the four g_a stages at 256x256.
  const std::uint64_t expect = 79ull * (2 * 128 * 128 * 96 + 4 * 64 * 64 * 144 + 6 * 32 * 32 * 256 +
                                        6 * 16 * 16 * 320);
  CHECK(attention_ops(cfg, wkv::Mechanism::kBiwkvShift, 256, 256) == expect);
  CHECK_THROWS_AS(attention_ops(cfg, wkv::Mechanism::kAft, 100, 64), Error);

  const std::vector<std::size_t> sides{256, 384, 512, 768, 1024};
  const BenchTable t = bench(cfg, sides, wkv::kAllMechanisms, false);
  REQUIRE(t.rows.size() == 5);
  for (double r2 : t.r_squared) CHECK(r2 >= 0.999);
  CHECK(t.format().find("BiWKV+Shift") != std::string::npos);

  const BenchTable none = bench(cfg, sides, {}, false);
  CHECK(none.rows.size() == 5);
  CHECK(none.rows[0].ops.empty());

  const std::vector<double> x{1, 2, 3}, y{2, 4, 6};
  CHECK(r_squared(x, y) == doctest::Approx(1.0));
}

#ifdef LALIC_CLI
TEST_CASE("cli exit codes") {
  TempDir dir;
  auto run = [](const std::string& args) {
    const int status = std::system((std::string(LALIC_CLI) + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
  };
  const std::string cfg = dir / "tiny.json";
  std::ofstream(cfg) << tiny_config().to_json();
  write_ppm(dir / "in.ppm", test_image(70, 60, 7));

  CHECK(run("") == 1);
  CHECK(run("compress --quality 9 " + dir / "in.ppm" + " " + dir / "out.lalb") == 1);
  CHECK(run("compress " + dir / "missing.ppm" + " " + dir / "out.lalb") == 2);
  CHECK(run("decompress --config " + cfg + " " + dir / "in.ppm" + " " + dir / "x.ppm") == 3);

  CHECK(run("compress --config " + cfg + " " + dir / "in.ppm" + " " + dir / "out.lalb") == 0);
  CHECK(run("decompress --config " + cfg + " " + dir / "out.lalb" + " " + dir / "rec.ppm") == 0);
  CHECK(read_ppm(dir / "rec.ppm").width == 70);
  CHECK(run("eval " + dir / "in.ppm" + " " + dir / "rec.ppm" + " --bitstream " + dir / "out.lalb") == 0);
  CHECK(run("decompress --seed 3 --config " + cfg + " " + dir / "out.lalb" + " " + dir / "o.ppm") == 5);
  CHECK(!fs::exists(dir / "o.ppm"));

  auto bytes = read_file(dir / "out.lalb");
  bytes.resize(bytes.size() - 3);
  write_file(dir / "cut.lalb", bytes);
  CHECK(run("decompress --config " + cfg + " " + dir / "cut.lalb" + " " + dir / "cut.ppm") == 4);
  CHECK(!fs::exists(dir / "cut.ppm"));
  CHECK(!fs::exists(dir / "cut.ppm.partial"));

  CHECK(run("init-weights --config " + cfg + " " + dir / "w.lalw") == 0);
  CHECK(run("compress --weights " + dir / "w.lalw" + " " + dir / "in.ppm" + " " + dir / "w.lalb") == 0);
  CHECK(run("decompress --config " + cfg + " " + dir / "w.lalb" + " " + dir / "w.ppm") == 5);
  CHECK(run("decompress --weights " + dir / "w.lalw" + " " + dir / "w.lalb" + " " + dir / "w.ppm") == 0);
  CHECK(run("bench --resolutions 256,512 --mechanisms AFT") == 0);
  CHECK(run("bench --resolutions 256,512 --mechanisms AFT,BiWKV+Shift") == 0);
  CHECK(run("bench --mechanisms Softmax") == 1);
}
#endif
