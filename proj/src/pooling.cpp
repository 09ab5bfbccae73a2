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
#include "qfca/pooling.hpp"

#include <algorithm>
#include <string>

#include "qfca/error.hpp"

namespace qfca {

Pad parse_pad(std::string_view name) {
  if (name == "reflect") return Pad::kReflect;
  if (name == "zero") return Pad::kZero;
  if (name == "wrap") return Pad::kWrap;
  throw ArgumentError("unknown padding mode '" + std::string(name) + "'");
}

std::string_view to_string(Pad pad) {
  switch (pad) {
    case Pad::kReflect:
      return "reflect";
    case Pad::kZero:
      return "zero";
    case Pad::kWrap:
      return "wrap";
  }
  return "?";
}

void check_kernel_size(int k) {
  if (k < 1 || k % 2 == 0)
    throw ArgumentError("kernel size must be odd and >= 1, got " + std::to_string(k));
}

namespace {

// Source index for extended coordinate `i - margin`; -1 means zero.
int source_index(int i, int n, Pad pad) {
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

}  // namespace

SummedAreaTable build_sat(const Plane& plane, int margin, Pad pad) {
  if (plane.height < 1 || plane.width < 1) throw ArgumentError("empty plane");
  if (margin < 0) throw ArgumentError("negative SAT margin");
  SummedAreaTable sat;
  sat.width = plane.width;
  sat.height = plane.height;
  sat.margin = margin;
  sat.pad = pad;
  const int eh = plane.height + 2 * margin;
  const int ew = plane.width + 2 * margin;
  sat.cumsum = Grid<double>(eh + 1, ew + 1, 0.0);
  for (int r = 0; r < eh; ++r) {
    const int sy = source_index(r - margin, plane.height, pad);
    double running = 0.0;
    for (int c = 0; c < ew; ++c) {
      const int sx = source_index(c - margin, plane.width, pad);
      if (sy >= 0 && sx >= 0) running += plane(sy, sx);
      sat.cumsum(r + 1, c + 1) = sat.cumsum(r, c + 1) + running;
    }
  }
  return sat;
}

double box_sum(const SummedAreaTable& sat, int cx, int cy, int k, Pad pad) {
  check_kernel_size(k);
  if (cx < 0 || cx >= sat.width || cy < 0 || cy >= sat.height)
    throw ArgumentError("box_sum centre out of bounds");
  const int half = k / 2;
  int r0, r1, c0, c1;  // half-open, table coordinates
  if (pad == Pad::kZero) {
    r0 = sat.margin + std::max(0, cy - half);
    r1 = sat.margin + std::min(sat.height, cy + half + 1);
    c0 = sat.margin + std::max(0, cx - half);
    c1 = sat.margin + std::min(sat.width, cx + half + 1);
  } else {
    if (sat.pad != pad || sat.margin < half)
      throw ArgumentError("summed-area table was not built with " +
                          std::string(to_string(pad)) + " padding of margin >= " +
                          std::to_string(half));
    r0 = sat.margin + cy - half;
    r1 = r0 + k;
    c0 = sat.margin + cx - half;
    c1 = c0 + k;
  }
  const auto& t = sat.cumsum;
  return t(r1, c1) - t(r0, c1) - t(r1, c0) + t(r0, c0);
}

Plane box_average(const Plane& plane, int k, Pad pad) {
  check_kernel_size(k);
  Plane out(plane.height, plane.width);
  BoxFilter filter;
  filter.apply(plane.data, plane.height, plane.width, k, pad, 1.0 / (double(k) * k),
               out.data);
  return out;
}

Plane naive_box_average(const Plane& plane, int k, Pad pad) {
  check_kernel_size(k);
  const int half = k / 2;
  Plane out(plane.height, plane.width);
  for (int y = 0; y < plane.height; ++y)
    for (int x = 0; x < plane.width; ++x) {
      double sum = 0.0;
      for (int dy = -half; dy <= half; ++dy) {
        const int sy = source_index(y + dy, plane.height, pad);
        if (sy < 0) continue;
        for (int dx = -half; dx <= half; ++dx) {
          const int sx = source_index(x + dx, plane.width, pad);
          if (sx >= 0) sum += plane(sy, sx);
        }
      }
      out(y, x) = static_cast<float>(sum / (double(k) * k));
    }
  return out;
}

void BoxFilter::build(std::span<const float> in, int height, int width, int margin,
                      Pad pad) {
  const int eh = height + 2 * margin;
  const int ew = width + 2 * margin;
  stride_ = ew + 1;
  table_.assign(static_cast<std::size_t>(eh + 1) * stride_, 0.0);
  col_index_.resize(ew);
  for (int c = 0; c < ew; ++c) col_index_[c] = source_index(c - margin, width, pad);
  for (int r = 0; r < eh; ++r) {
    const int sy = source_index(r - margin, height, pad);
    const float* src = in.data() + static_cast<std::size_t>(sy) * width;
    const double* above = table_.data() + static_cast<std::size_t>(r) * stride_;
    double* cur = table_.data() + static_cast<std::size_t>(r + 1) * stride_;
    double running = 0.0;
    for (int c = 0; c < ew; ++c) {
      running += src[col_index_[c]];
      cur[c + 1] = above[c + 1] + running;
    }
  }
}

void BoxFilter::apply(std::span<const float> in, int height, int width, int k, Pad pad,
                      double scale, std::span<float> out) {
  check_kernel_size(k);
  const int half = k / 2;
  if (pad == Pad::kZero) {
    build(in, height, width, 0, Pad::kZero);
    for (int y = 0; y < height; ++y) {
      const int r0 = std::max(0, y - half);
      const int r1 = std::min(height, y + half + 1);
      const double* top = table_.data() + static_cast<std::size_t>(r0) * stride_;
      const double* bottom = table_.data() + static_cast<std::size_t>(r1) * stride_;
      float* dst = out.data() + static_cast<std::size_t>(y) * width;
      for (int x = 0; x < width; ++x) {
        const int c0 = std::max(0, x - half);
        const int c1 = std::min(width, x + half + 1);
        dst[x] = static_cast<float>(scale *
                                    (bottom[c1] - top[c1] - bottom[c0] + top[c0]));
      }
    }
    return;
  }
  build(in, height, width, half, pad);
  for (int y = 0; y < height; ++y) {
    const double* top = table_.data() + static_cast<std::size_t>(y) * stride_;
    const double* bottom = table_.data() + static_cast<std::size_t>(y + k) * stride_;
    float* dst = out.data() + static_cast<std::size_t>(y) * width;
    for (int x = 0; x < width; ++x)
      dst[x] = static_cast<float>(
          scale * (bottom[x + k] - top[x + k] - bottom[x] + top[x]));
  }
}

}  // namespace qfca
