/* Copyright 2026 The QFCA Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "qfca/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "qfca/error.hpp"
#include "qfca/filters.hpp"
#include "qfca/parallel.hpp"
#include "qfca/pooling.hpp"

namespace qfca {

std::vector<double> time_runs(const std::function<void()>& fn, int repeats) {
  if (repeats < 1) throw ArgumentError("repeats must be >= 1");
  std::vector<double> times;
  times.reserve(repeats);
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    times.push_back(std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count());
  }
  return times;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw ArgumentError("percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = q * (values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - lo) * (values[hi] - values[lo]);
}

BenchRow summarize(std::string suite, std::string param, const std::vector<double>& times) {
  return {std::move(suite), std::move(param), percentile(times, 0.5), percentile(times, 0.1),
          percentile(times, 0.9)};
}

std::string csv_header() { return "suite,param,median_ms,p10,p90"; }

std::string csv_line(const BenchRow& row) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s,%s,%.4f,%.4f,%.4f", row.suite.c_str(), row.param.c_str(),
                row.median_ms, row.p10_ms, row.p90_ms);
  return buf;
}

PlaneStack random_planes(int count, int height, int width, std::uint64_t seed) {
  PlaneStack s{count, height, width,
               std::vector<float>(static_cast<std::size_t>(count) * height * width)};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  for (auto& v : s.values) v = unit(rng);
  return s;
}

void sat_pool_stack(const PlaneStack& in, int k, Pad pad, std::vector<float>& out) {
  const std::size_t plane = static_cast<std::size_t>(in.height) * in.width;
  out.resize(in.values.size());
  std::vector<BoxFilter> filters(workers_for(in.count));
  const double scale = 1.0 / (double(k) * k);
  parallel_for(in.count, [&](std::size_t w, std::size_t i) {
    filters[w].apply(std::span(in.values).subspan(i * plane, plane), in.height, in.width, k,
                     pad, scale, std::span(out).subspan(i * plane, plane));
  });
}

void naive_pool_stack(const PlaneStack& in, int k, Pad pad, int planes,
                      std::vector<float>& out) {
  const std::size_t plane = static_cast<std::size_t>(in.height) * in.width;
  const int n = std::min(planes, in.count);
  out.resize(static_cast<std::size_t>(n) * plane);
  parallel_for(n, [&](std::size_t, std::size_t i) {
    Plane p(in.height, in.width);
    std::copy_n(in.values.begin() + i * plane, plane, p.data.begin());
    const Plane r = naive_box_average(p, k, pad);
    std::copy(r.data.begin(), r.data.end(), out.begin() + i * plane);
  });
}

FeatureMap random_smooth_features(int channels, int height, int width, std::uint64_t seed,
                                  double sigma) {
  FeatureMap f(channels, height, width);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Kernel1D g = gaussian_kernel(sigma);
  for (int c = 0; c < channels; ++c) {
    Plane p(height, width);
    for (auto& v : p.data) v = static_cast<float>(normal(rng));
    p = separable_filter(p, g, g, Pad::kWrap);
    const double offset = unit(rng) * 2 - 1, amp = 0.5 + unit(rng);
    auto dst = f.channel(c);
    for (std::size_t i = 0; i < p.size(); ++i)
      dst[i] = static_cast<float>(offset + amp * p.data[i]);
  }
  return f;
}

}  // namespace qfca
