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
#include "qfca/filters.hpp"

#include <cmath>

#include "qfca/error.hpp"

namespace qfca {

namespace {

int default_radius(double sigma) { return static_cast<int>(std::ceil(3.0 * sigma)); }

double gauss(double x, double sigma) { return std::exp(-0.5 * x * x / (sigma * sigma)); }

int map_index(int i, int n, Pad pad) {
  switch (pad) {
    case Pad::kReflect:
      return reflect_index(i, n);
    case Pad::kWrap:
      return wrap_index(i, n);
    case Pad::kZero:
      return (i >= 0 && i < n) ? i : -1;
  }
  return -1;
}

// Filters one line `src` (n samples, spacing `step`) into `dst`.
void filter_line(const float* src, int n, std::ptrdiff_t step, const Kernel1D& k, Pad pad,
                 std::vector<double>& line, float* dst) {
  const int r = k.radius();
  line.resize(n + 2 * r);
  for (int i = -r; i < n + r; ++i) {
    const int s = map_index(i, n, pad);
    line[i + r] = s < 0 ? 0.0 : static_cast<double>(src[s * step]);
  }
  const double* c = line.data() + r;
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    switch (k.symmetry) {
      case Kernel1D::Symmetry::kSymmetric:
        acc = k.taps[0] * c[i];
        for (int t = 1; t <= r; ++t) acc += k.taps[t] * (c[i + t] + c[i - t]);
        break;
      case Kernel1D::Symmetry::kAntisymmetric:
        for (int t = 1; t <= r; ++t) acc += k.taps[t] * (c[i + t] - c[i - t]);
        break;
      case Kernel1D::Symmetry::kZeroSum:
        for (int t = 1; t <= r; ++t) acc += k.taps[t] * ((c[i + t] - c[i]) + (c[i - t] - c[i]));
        break;
    }
    dst[i * step] = static_cast<float>(acc);
  }
}

}  // namespace

Kernel1D gaussian_kernel(double sigma, int radius) {
  if (!(sigma > 0)) throw ArgumentError("Gaussian sigma must be positive");
  if (radius < 0) radius = default_radius(sigma);
  Kernel1D k{Kernel1D::Symmetry::kSymmetric, std::vector<double>(radius + 1)};
  double total = 0.0;
  for (int t = 0; t <= radius; ++t) {
    k.taps[t] = gauss(t, sigma);
    total += t == 0 ? k.taps[t] : 2.0 * k.taps[t];
  }
  for (auto& w : k.taps) w /= total;
  return k;
}

Kernel1D gaussian_derivative_kernel(double sigma) {
  if (!(sigma > 0)) throw ArgumentError("Gaussian sigma must be positive");
  const int radius = default_radius(sigma);
  Kernel1D k{Kernel1D::Symmetry::kAntisymmetric, std::vector<double>(radius + 1, 0.0)};
  // response to f(x) = x is sum_t taps[t] * 2t; normalize it to 1
  double moment = 0.0;
  for (int t = 1; t <= radius; ++t) {
    k.taps[t] = t * gauss(t, sigma);
    moment += 2.0 * t * k.taps[t];
  }
  for (auto& w : k.taps) w /= moment;
  return k;
}

Kernel1D gaussian_second_derivative_kernel(double sigma) {
  if (!(sigma > 0)) throw ArgumentError("Gaussian sigma must be positive");
  const int radius = default_radius(sigma);
  Kernel1D k{Kernel1D::Symmetry::kZeroSum, std::vector<double>(radius + 1, 0.0)};
  // raw second-derivative shape, then remove the DC part implicitly (taps[0]
  // is never used) and scale so that f(x) = x^2 gives 2
  double moment = 0.0;
  for (int t = 1; t <= radius; ++t) {
    k.taps[t] = (t * t / (sigma * sigma) - 1.0) * gauss(t, sigma);
    moment += 2.0 * t * t * k.taps[t];
  }
  if (moment == 0.0) throw ArgumentError("degenerate second-derivative kernel");
  for (auto& w : k.taps) w *= 2.0 / moment;
  return k;
}

Plane separable_filter(const Plane& in, const Kernel1D& along_x, const Kernel1D& along_y,
                       Pad pad) {
  Plane tmp(in.height, in.width);
  Plane out(in.height, in.width);
  std::vector<double> line;
  for (int y = 0; y < in.height; ++y)
    filter_line(in.row(y).data(), in.width, 1, along_x, pad, line, tmp.row(y).data());
  for (int x = 0; x < in.width; ++x)
    filter_line(tmp.data.data() + x, in.height, in.width, along_y, pad, line,
                out.data.data() + x);
  return out;
}

}  // namespace qfca
