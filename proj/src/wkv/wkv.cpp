// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lalic/wkv.hpp"

namespace lalic::wkv {
namespace {

template <typename Real>
void check_inputs(const BasicTensor<Real>& key, const BasicTensor<Real>& value,
                  const char* op) {
  check_arg(key.rank() == 2 && key.shape() == value.shape(),
            std::string(op) + ": K " + lalic::to_string(key.shape()) + " and V " +
                lalic::to_string(value.shape()) + " must be equal (C,T)");
  check_arg(key.dim(1) >= 1, std::string(op) + ": empty sequence");
}

template <typename Real>
void check_params(const AttentionParams<Real>& p, std::size_t channels,
                  const char* op) {
  check_arg(p.decay.size() == channels && p.bonus.size() == channels,
            std::string(op) + ": decay/bonus length must equal C=" +
                std::to_string(channels));
}

template <typename Real>
Real exponent(std::size_t t, std::size_t i, std::size_t len, Real w, Real u,
              Real k) {
  if (i == t) return u + k;
  const std::size_t dist = t > i ? t - i : i - t;
  return -(Real(dist - 1) / Real(len)) * w + k;
}

// Running sum of e^{x_j} * v_j stored as e^{max} * (num, den).
template <typename Real>
struct ShiftedSum {
  Real max = -std::numeric_limits<Real>::infinity();
  Real num = 0;
  Real den = 0;

  void add(Real x, Real v) {
    if (x > max) {
      const Real scale = std::exp(max - x);
      num = num * scale + v;
      den = den * scale + Real(1);
      max = x;
    } else {
      const Real e = std::exp(x - max);
      num = num + e * v;
      den = den + e;
    }
  }
  bool empty() const { return den == Real(0); }
};

}  // namespace

template <typename Real>
BasicTensor<Real> aft_reference(const BasicTensor<Real>& key,
                                const BasicTensor<Real>& value) {
  check_inputs(key, value, "aft_reference");
  const std::size_t channels = key.dim(0), len = key.dim(1);
  BasicTensor<Real> out(key.shape());
  for (std::size_t c = 0; c < channels; ++c) {
    const Real* k = key.data() + c * len;
    const Real* v = value.data() + c * len;
    const Real m = *std::max_element(k, k + len);
    Real num = 0, den = 0;
    for (std::size_t i = 0; i < len; ++i) {
      const Real e = std::exp(k[i] - m);
      num = num + e * v[i];
      den = den + e;
    }
    std::fill_n(out.data() + c * len, len, num / den);
  }
  return out;
}

template <typename Real>
BasicTensor<Real> biwkv_reference(const BasicTensor<Real>& key,
                                  const BasicTensor<Real>& value,
                                  const AttentionParams<Real>& params) {
  check_inputs(key, value, "biwkv_reference");
  const std::size_t channels = key.dim(0), len = key.dim(1);
  check_params(params, channels, "biwkv_reference");
  BasicTensor<Real> out(key.shape());
  std::vector<Real> e(len);
  for (std::size_t c = 0; c < channels; ++c) {
    const Real* k = key.data() + c * len;
    const Real* v = value.data() + c * len;
    const Real w = params.decay[c], u = params.bonus[c];
    for (std::size_t t = 0; t < len; ++t) {
      for (std::size_t i = 0; i < len; ++i) e[i] = exponent(t, i, len, w, u, k[i]);
      const Real m = *std::max_element(e.begin(), e.end());
      Real num = 0, den = 0;
      for (std::size_t i = 0; i < len; ++i) {
        const Real a = std::exp(e[i] - m);
        num = num + a * v[i];
        den = den + a;
      }
      out[c * len + t] = num / den;
    }
  }
  return out;
}

template <typename Real>
BasicTensor<Real> biwkv_scan(const BasicTensor<Real>& key,
                             const BasicTensor<Real>& value,
                             const AttentionParams<Real>& params) {
  check_inputs(key, value, "biwkv_scan");
  const std::size_t channels = key.dim(0), len = key.dim(1);
  check_params(params, channels, "biwkv_scan");
  BasicTensor<Real> out(key.shape());
  std::vector<ShiftedSum<Real>> right(len);
  for (std::size_t c = 0; c < channels; ++c) {
    const Real* k = key.data() + c * len;
    const Real* v = value.data() + c * len;
    Real* o = out.data() + c * len;
    const Real d = params.decay[c] / Real(len);
    const Real u = params.bonus[c];

    // right[t] accumulates i > t with anchored exponents k_i - i*d.
    ShiftedSum<Real> acc;
    for (std::size_t t = len; t-- > 0;) {
      right[t] = acc;
      acc.add(k[t] - Real(t) * d, v[t]);
    }

    ShiftedSum<Real> left;  // i < t, anchored exponents k_i + i*d
    for (std::size_t t = 0; t < len; ++t) {
      const Real e_cur = u + k[t];
      const Real e_left = left.max - Real(t) * d + d;       // - (t-1) d
      const Real e_right = right[t].max + Real(t) * d + d;  // + (t+1) d
      Real m = e_cur;
      if (!left.empty()) m = std::max(m, e_left);
      if (!right[t].empty()) m = std::max(m, e_right);
      const Real a_cur = std::exp(e_cur - m);
      Real num = a_cur * v[t];
      Real den = a_cur;
      if (!left.empty()) {
        const Real s = std::exp(e_left - m);
        num = num + s * left.num;
        den = den + s * left.den;
      }
      if (!right[t].empty()) {
        const Real s = std::exp(e_right - m);
        num = num + s * right[t].num;
        den = den + s * right[t].den;
      }
      o[t] = num / den;
      left.add(k[t] + Real(t) * d, v[t]);
    }
  }
  return out;
}

template <typename Real>
BiwkvGradients<Real> biwkv_backward(const BasicTensor<Real>& key,
                                    const BasicTensor<Real>& value,
                                    const AttentionParams<Real>& params,
                                    const BasicTensor<Real>& grad_out) {
  check_inputs(key, value, "biwkv_backward");
  check_arg(grad_out.shape() == key.shape(),
            "biwkv_backward: grad_out shape " + lalic::to_string(grad_out.shape()) +
                " != " + lalic::to_string(key.shape()));
  const std::size_t channels = key.dim(0), len = key.dim(1);
  check_params(params, channels, "biwkv_backward");

  BiwkvGradients<Real> g{BasicTensor<Real>(key.shape()),
                         BasicTensor<Real>(key.shape()),
                         std::vector<Real>(channels, Real(0)),
                         std::vector<Real>(channels, Real(0))};
  std::vector<Real> p(len);
  for (std::size_t c = 0; c < channels; ++c) {
    const Real* k = key.data() + c * len;
    const Real* v = value.data() + c * len;
    const Real* go = grad_out.data() + c * len;
    Real* dk = g.d_key.data() + c * len;
    Real* dv = g.d_value.data() + c * len;
    const Real w = params.decay[c], u = params.bonus[c];
    for (std::size_t t = 0; t < len; ++t) {
      for (std::size_t i = 0; i < len; ++i) p[i] = exponent(t, i, len, w, u, k[i]);
      const Real m = *std::max_element(p.begin(), p.end());
      Real den = 0;
      for (std::size_t i = 0; i < len; ++i) {
        p[i] = std::exp(p[i] - m);
        den = den + p[i];
      }
      Real y = 0;
      for (std::size_t i = 0; i < len; ++i) {
        p[i] = p[i] / den;
        y = y + p[i] * v[i];
      }
      // d out_t / d x_ti = p_ti (v_i - y_t) for every exponent x_ti.
      for (std::size_t i = 0; i < len; ++i) {
        const Real dx = go[t] * p[i] * (v[i] - y);
        dv[i] = dv[i] + go[t] * p[i];
        dk[i] = dk[i] + dx;
        if (i == t) {
          g.d_bonus[c] = g.d_bonus[c] + dx;
        } else {
          const std::size_t dist = t > i ? t - i : i - t;
          g.d_decay[c] = g.d_decay[c] - dx * (Real(dist - 1) / Real(len));
        }
      }
    }
  }
  return g;
}

#define LALIC_INSTANTIATE_WKV(Real)                                          \
  template BasicTensor<Real> aft_reference(const BasicTensor<Real>&,         \
                                           const BasicTensor<Real>&);        \
  template BasicTensor<Real> biwkv_reference(const BasicTensor<Real>&,       \
                                             const BasicTensor<Real>&,       \
                                             const AttentionParams<Real>&);  \
  template BasicTensor<Real> biwkv_scan(const BasicTensor<Real>&,            \
                                        const BasicTensor<Real>&,            \
                                        const AttentionParams<Real>&);       \
  template BiwkvGradients<Real> biwkv_backward(                              \
      const BasicTensor<Real>&, const BasicTensor<Real>&,                    \
      const AttentionParams<Real>&, const BasicTensor<Real>&);

LALIC_INSTANTIATE_WKV(float)
LALIC_INSTANTIATE_WKV(double)

#undef LALIC_INSTANTIATE_WKV

}  // namespace lalic::wkv
