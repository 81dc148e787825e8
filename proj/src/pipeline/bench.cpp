// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lalic/bench.hpp"

#include <chrono>
#include <cstdio>
#include <string>

#include "lalic/error.hpp"
#include "lalic/rng.hpp"

namespace lalic {

std::uint64_t attention_ops(const ModelConfig& config, wkv::Mechanism mechanism,
                            std::size_t height, std::size_t width) {
  check_arg(height % 64 == 0 && width % 64 == 0 && height > 0 && width > 0,
            "bench: resolution " + std::to_string(width) + "x" +
                std::to_string(height) + " is not a multiple of 64");
  const auto widths = config.transform_widths();
  std::uint64_t total = 0;
  for (std::size_t s = 0; s < 4; ++s) {
    const std::uint64_t t = (height >> (s + 1)) * (width >> (s + 1));
    total += config.stage_blocks[s] * wkv::op_count(mechanism, t, widths[s]);
  }
  return total;
}

double r_squared(std::span<const double> x, std::span<const double> y) {
  check_arg(x.size() == y.size() && x.size() >= 2, "r_squared: need >= 2 paired samples");
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (syy == 0.0) return 1.0;
  if (sxx == 0.0) return 0.0;
  const double slope = sxy / sxx, intercept = my - slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (intercept + slope * x[i]);
    ss_res += e * e;
  }
  return 1.0 - ss_res / syy;
}

namespace {

double time_scans(const ModelConfig& config, std::size_t side) {
  const auto widths = config.transform_widths();
  Rng rng(side);
  double seconds = 0.0;
  for (std::size_t s = 0; s < 4; ++s) {
    const std::size_t t = (side >> (s + 1)) * (side >> (s + 1)), c = widths[s];
    Tensor k({c, t}), v({c, t});
    for (float& e : k.values()) e = float(rng.uniform(-2, 2));
    for (float& e : v.values()) e = float(rng.uniform(-1, 1));
    wkv::AttentionParams<float> p{std::vector<float>(c, 1.0f), std::vector<float>(c, 0.5f)};
    for (std::size_t b = 0; b < config.stage_blocks[s]; ++b) {
      const auto start = std::chrono::steady_clock::now();
      volatile float sink = wkv::biwkv_scan(k, v, p)[0];
      (void)sink;
      seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  }
  return seconds;
}

}  // namespace

BenchTable bench(const ModelConfig& config, std::span<const std::size_t> resolutions,
                 std::span<const wkv::Mechanism> mechanisms, bool time_scans_flag) {
  BenchTable table;
  table.mechanisms.assign(mechanisms.begin(), mechanisms.end());
  for (std::size_t side : resolutions) {
    BenchRow row;
    row.resolution = side;
    row.pixels = std::uint64_t(side) * side;
    for (wkv::Mechanism m : mechanisms) row.ops.push_back(attention_ops(config, m, side, side));
    if (time_scans_flag) row.scan_seconds = time_scans(config, side);
    table.rows.push_back(std::move(row));
  }
  if (table.rows.size() >= 2) {
    std::vector<double> px;
    for (const auto& r : table.rows) px.push_back(double(r.pixels));
    for (std::size_t j = 0; j < mechanisms.size(); ++j) {
      std::vector<double> ops;
      for (const auto& r : table.rows) ops.push_back(double(r.ops[j]));
      table.r_squared.push_back(r_squared(px, ops));
    }
    if (time_scans_flag) {
      std::vector<double> secs;
      for (const auto& r : table.rows) secs.push_back(r.scan_seconds);
      table.time_r_squared = r_squared(px, secs);
    }
  }
  return table;
}

std::string BenchTable::format() const {
  std::string out = "resolution  pixels";
  for (wkv::Mechanism m : mechanisms) out += "  " + std::string(wkv::to_string(m));
  out += "  scan_s\n";
  char buf[64];
  for (const auto& r : rows) {
    out += std::to_string(r.resolution) + "x" + std::to_string(r.resolution) + "  " +
           std::to_string(r.pixels);
    for (std::uint64_t o : r.ops) out += "  " + std::to_string(o);
    std::snprintf(buf, sizeof buf, "  %.4f\n", r.scan_seconds);
    out += buf;
  }
  if (!r_squared.empty()) {
    out += "R^2(ops vs pixels):";
    for (std::size_t j = 0; j < mechanisms.size(); ++j) {
      std::snprintf(buf, sizeof buf, " %s=%.6f", std::string(wkv::to_string(mechanisms[j])).c_str(),
                    r_squared[j]);
      out += buf;
    }
    std::snprintf(buf, sizeof buf, "\nR^2(scan time vs pixels): %.4f\n", time_r_squared);
    out += buf;
  }
  return out;
}

}  // namespace lalic
