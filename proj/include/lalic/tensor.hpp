// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lalic/error.hpp"

namespace lalic {

using Shape = std::vector<std::size_t>;

inline std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

inline std::string to_string(const Shape& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

/// Dense channels-first array. Rank 3 tensors are (C,H,W) feature maps,
/// rank 4 are (Cout,Cin,kH,kW) kernels, rank 1 are vectors.
///
/// Token sequences are rank 2 with shape (C,T) and are stored channel-major:
/// token t of channel c sits at c*T + t. Flattening a (C,H,W) map with
/// T = H*W is therefore a pure reshape, t = h*W + w.
template <typename Real>
class BasicTensor {
 public:
  using value_type = Real;

  BasicTensor() = default;

  explicit BasicTensor(Shape shape, Real fill = Real(0))
      : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

  BasicTensor(Shape shape, std::vector<Real> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    check_arg(data_.size() == element_count(shape_),
              "tensor data length " + std::to_string(data_.size()) +
                  " does not match shape " + lalic::to_string(shape_));
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<Real> values() noexcept { return data_; }
  std::span<const Real> values() const noexcept { return data_; }
  Real* data() noexcept { return data_.data(); }
  const Real* data() const noexcept { return data_.data(); }

  Real& operator[](std::size_t i) { return data_[i]; }
  const Real& operator[](std::size_t i) const { return data_[i]; }

  Real& at(std::size_t c, std::size_t h, std::size_t w) {
    return data_[(c * shape_[1] + h) * shape_[2] + w];
  }
  const Real& at(std::size_t c, std::size_t h, std::size_t w) const {
    return data_[(c * shape_[1] + h) * shape_[2] + w];
  }
  Real& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  const Real& at(std::size_t i, std::size_t j) const {
    return data_[i * shape_[1] + j];
  }

  /// Contiguous row `i` along the leading axis (a channel plane, a matrix row).
  std::span<Real> row(std::size_t i) {
    const std::size_t n = data_.size() / shape_[0];
    return {data_.data() + i * n, n};
  }
  std::span<const Real> row(std::size_t i) const {
    const std::size_t n = data_.size() / shape_[0];
    return {data_.data() + i * n, n};
  }

  BasicTensor reshaped(Shape shape) const& {
    return BasicTensor(std::move(shape), data_);
  }
  BasicTensor reshaped(Shape shape) && {
    return BasicTensor(std::move(shape), std::move(data_));
  }

  template <typename Other>
  BasicTensor<Other> cast() const {
    std::vector<Other> out(data_.begin(), data_.end());
    return BasicTensor<Other>(shape_, std::move(out));
  }

  void fill(Real v) { std::fill(data_.begin(), data_.end(), v); }

  friend bool operator==(const BasicTensor& a, const BasicTensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  std::vector<Real> data_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

/// (C,H,W) -> (C,T) sequence view, T = H*W.
template <typename Real>
BasicTensor<Real> to_sequence(BasicTensor<Real> f) {
  check_arg(f.rank() == 3, "to_sequence expects (C,H,W), got " +
                               to_string(f.shape()));
  const std::size_t c = f.dim(0), t = f.dim(1) * f.dim(2);
  return std::move(f).reshaped({c, t});
}

/// (C,T) -> (C,H,W); requires T == H*W.
template <typename Real>
BasicTensor<Real> from_sequence(BasicTensor<Real> x, std::size_t h,
                                std::size_t w) {
  check_arg(x.rank() == 2 && x.dim(1) == h * w,
            "from_sequence: " + to_string(x.shape()) + " cannot view as " +
                std::to_string(h) + "x" + std::to_string(w));
  const std::size_t c = x.dim(0);
  return std::move(x).reshaped({c, h, w});
}

}  // namespace lalic
