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
#ifndef QFCA_POOLING_HPP
#define QFCA_POOLING_HPP

// Box pooling through summed-area tables: the cost per output pixel is four
// table lookups whatever the kernel size.

#include <span>
#include <vector>

#include "qfca/grid.hpp"

namespace qfca {

/// Prefix sums of a plane, optionally extended by `margin` pixels on every
/// side using `pad` so that windows crossing the border can be summed
/// directly. cumsum(i, j) = sum over extended rows < i and columns < j;
/// the first row and column are zero.
struct SummedAreaTable {
  int width = 0;   // of the original plane
  int height = 0;  // of the original plane
  int margin = 0;
  Pad pad = Pad::kZero;
  Grid<double> cumsum;  // (height + 2*margin + 1) x (width + 2*margin + 1)
};

SummedAreaTable build_sat(const Plane& plane, int margin = 0, Pad pad = Pad::kZero);

/// Sum over the k x k window centred at column cx, row cy. Reflect and wrap
/// need a table built with that pad and margin >= k/2; zero padding works on
/// any table and clamps the window to the plane.
double box_sum(const SummedAreaTable& sat, int cx, int cy, int k, Pad pad);

Plane box_average(const Plane& plane, int k, Pad pad);

/// Direct k*k summation per pixel. Test and benchmark baseline only.
Plane naive_box_average(const Plane& plane, int k, Pad pad);

/// Reusable box filter over raw row-major buffers for the hot paths
/// (histogram counting and error association). Holds its own scratch table,
/// so one instance per worker.
class BoxFilter {
 public:
  /// out[y, x] = scale * (sum of the k x k window around (y, x)).
  void apply(std::span<const float> in, int height, int width, int k, Pad pad,
             double scale, std::span<float> out);

 private:
  void build(std::span<const float> in, int height, int width, int margin, Pad pad);

  std::vector<double> table_;
  std::vector<int> col_index_;
  int stride_ = 0;
};

void check_kernel_size(int k);

}  // namespace qfca

#endif  // QFCA_POOLING_HPP
