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
#ifndef QFCA_GRID_HPP
#define QFCA_GRID_HPP

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace qfca {

/// Dense row-major 2-D array. `(y, x)` indexing, y is the row.
template <typename T>
struct Grid {
  int height = 0;
  int width = 0;
  std::vector<T> data;

  Grid() = default;
  Grid(int h, int w, T fill = T{})
      : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {}

  std::size_t size() const noexcept { return data.size(); }
  T& operator()(int y, int x) noexcept {
    assert(y >= 0 && y < height && x >= 0 && x < width);
    return data[static_cast<std::size_t>(y) * width + x];
  }
  const T& operator()(int y, int x) const noexcept {
    assert(y >= 0 && y < height && x >= 0 && x < width);
    return data[static_cast<std::size_t>(y) * width + x];
  }
  std::span<T> row(int y) noexcept {
    return {data.data() + static_cast<std::size_t>(y) * width,
            static_cast<std::size_t>(width)};
  }
  std::span<const T> row(int y) const noexcept {
    return {data.data() + static_cast<std::size_t>(y) * width,
            static_cast<std::size_t>(width)};
  }
};

using Plane = Grid<float>;
using Mask = Grid<std::uint8_t>;

/// Border handling for windowed operations.
///   kReflect: mirror without repeating the edge (..., 2, 1 | 0, 1, 2, ...).
///   kZero:    out-of-bounds samples contribute nothing.
///   kWrap:    toroidal; used by shift-equivariance checks.
enum class Pad { kReflect, kZero, kWrap };

Pad parse_pad(std::string_view name);
std::string_view to_string(Pad pad);

/// Maps an arbitrary integer index onto [0, n) with reflect-101 semantics.
/// Works for offsets larger than n (the reflection is periodic with 2n-2).
inline int reflect_index(int i, int n) noexcept {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

inline int wrap_index(int i, int n) noexcept {
  i %= n;
  return i < 0 ? i + n : i;
}

}  // namespace qfca

#endif  // QFCA_GRID_HPP
