// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lalic/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "lalic/error.hpp"

namespace lalic {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open '" + path + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorKind::kIo, "error reading '" + path + "'");
  return bytes;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  const std::string tmp = path + ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::kIo, "cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              std::streamsize(bytes.size()));
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      fail(ErrorKind::kIo, "error writing '" + path + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    fail(ErrorKind::kIo, "cannot move output into place at '" + path + "'");
  }
}

namespace {

class PpmReader {
 public:
  explicit PpmReader(const std::vector<std::uint8_t>& b) : b_(b) {}

  void skip_space() {
    while (pos_ < b_.size()) {
      if (b_[pos_] == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else if (std::isspace(b_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::size_t number() {
    skip_space();
    std::size_t v = 0, digits = 0;
    while (pos_ < b_.size() && std::isdigit(b_[pos_])) {
      v = v * 10 + (b_[pos_++] - '0');
      if (++digits > 9) fail(ErrorKind::kFormat, "PPM header value too large");
    }
    if (digits == 0) fail(ErrorKind::kFormat, "malformed PPM header");
    return v;
  }

  std::size_t pos_ = 0;
  const std::vector<std::uint8_t>& b_;
};

}  // namespace

Image parse_ppm(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    fail(ErrorKind::kFormat, "not a binary PPM (P6) image");
  }
  PpmReader r(bytes);
  r.pos_ = 2;
  Image img;
  img.width = r.number();
  img.height = r.number();
  const std::size_t maxval = r.number();
  if (maxval != 255) fail(ErrorKind::kFormat, "only 8-bit PPM (maxval 255) is supported");
  if (img.width == 0 || img.height == 0) fail(ErrorKind::kFormat, "PPM has zero extent");
  if (r.pos_ >= bytes.size() || !std::isspace(bytes[r.pos_])) {
    fail(ErrorKind::kFormat, "malformed PPM header");
  }
  ++r.pos_;
  const std::size_t n = img.width * img.height * 3;
  if (bytes.size() - r.pos_ < n) fail(ErrorKind::kFormat, "PPM pixel data truncated");
  img.rgb.assign(bytes.begin() + std::ptrdiff_t(r.pos_),
                 bytes.begin() + std::ptrdiff_t(r.pos_ + n));
  return img;
}

Image read_ppm(const std::string& path) { return parse_ppm(read_file(path)); }

std::vector<std::uint8_t> encode_ppm(const Image& image) {
  check_arg(image.rgb.size() == image.width * image.height * 3,
            "image buffer does not match its extents");
  const std::string header = "P6\n" + std::to_string(image.width) + " " +
                             std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.rgb.begin(), image.rgb.end());
  return out;
}

void write_ppm(const std::string& path, const Image& image) {
  write_file(path, encode_ppm(image));
}

template <typename Real>
BasicTensor<Real> image_to_tensor(const Image& image) {
  const std::size_t h = image.height, w = image.width;
  BasicTensor<Real> x({3, h, w});
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < h * w; ++i) {
      x[c * h * w + i] = Real(image.rgb[i * 3 + c]) / Real(255);
    }
  }
  return x;
}

template <typename Real>
Image tensor_to_image(const BasicTensor<Real>& x) {
  check_arg(x.rank() == 3 && x.dim(0) == 3,
            "tensor_to_image: expected (3,H,W), got " + to_string(x.shape()));
  Image img{x.dim(2), x.dim(1), {}};
  const std::size_t plane = img.width * img.height;
  img.rgb.resize(plane * 3);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < plane; ++i) {
      const Real v = std::clamp(x[c * plane + i], Real(0), Real(1));
      img.rgb[i * 3 + c] = std::uint8_t(std::lround(double(v) * 255.0));
    }
  }
  return img;
}

template BasicTensor<float> image_to_tensor(const Image&);
template BasicTensor<double> image_to_tensor(const Image&);
template Image tensor_to_image(const BasicTensor<float>&);
template Image tensor_to_image(const BasicTensor<double>&);

}  // namespace lalic
