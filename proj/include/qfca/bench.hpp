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
#ifndef QFCA_BENCH_HPP
#define QFCA_BENCH_HPP

// Timing helpers and the benchmark workloads shared by the CLI and the
// acceptance checks.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qfca/features.hpp"
#include "qfca/grid.hpp"

namespace qfca {

struct BenchRow {
  std::string suite;
  std::string param;
  double median_ms = 0;
  double p10_ms = 0;
  double p90_ms = 0;
};

/// Wall time of `repeats` calls of `fn`, in ms.
std::vector<double> time_runs(const std::function<void()>& fn, int repeats);

/// Linear-interpolated percentile, q in [0, 1].
double percentile(std::vector<double> values, double q);

BenchRow summarize(std::string suite, std::string param, const std::vector<double>& times_ms);

std::string csv_header();
std::string csv_line(const BenchRow& row);

/// `n` planes of h x w uniform noise in [0, 1), stored back to back.
struct PlaneStack {
  int count = 0;
  int height = 0;
  int width = 0;
  std::vector<float> values;
};

PlaneStack random_planes(int count, int height, int width, std::uint64_t seed);

/// Box average of every plane through the summed-area table path.
void sat_pool_stack(const PlaneStack& in, int k, Pad pad, std::vector<float>& out);

/// Direct k x k summation of the first `planes` planes.
void naive_pool_stack(const PlaneStack& in, int k, Pad pad, int planes,
                      std::vector<float>& out);

/// C x H x W Gaussian-smoothed noise (periodic), each channel with its own
/// offset and amplitude.
FeatureMap random_smooth_features(int channels, int height, int width, std::uint64_t seed,
                                  double sigma = 2.0);

}  // namespace qfca

#endif  // QFCA_BENCH_HPP
