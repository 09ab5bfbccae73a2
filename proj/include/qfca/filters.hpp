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
#ifndef QFCA_FILTERS_HPP
#define QFCA_FILTERS_HPP

#include <vector>

#include "qfca/grid.hpp"

namespace qfca {

/// 1-D correlation kernel with explicit symmetry so that flat inputs give
/// exact results (antisymmetric kernels yield exactly 0 on constants).
struct Kernel1D {
  enum class Symmetry { kSymmetric, kAntisymmetric, kZeroSum };
  Symmetry symmetry = Symmetry::kSymmetric;
  // taps[r] is the weight at offset +r; offset -r has weight taps[r]
  // (symmetric, zero-sum) or -taps[r] (antisymmetric). For zero-sum kernels
  // taps[0] is implied as -2 * sum(taps[1..]).
  std::vector<double> taps;
  int radius() const { return static_cast<int>(taps.size()) - 1; }
};

/// Normalized sampled Gaussian, radius ceil(3 sigma) unless given.
Kernel1D gaussian_kernel(double sigma, int radius = -1);
/// Gaussian derivative, scaled so a unit ramp gives response 1.
Kernel1D gaussian_derivative_kernel(double sigma);
/// Gaussian second derivative, zero-sum, scaled so x^2 gives response 2.
Kernel1D gaussian_second_derivative_kernel(double sigma);

/// Applies `along_x` to rows then `along_y` to columns.
Plane separable_filter(const Plane& in, const Kernel1D& along_x, const Kernel1D& along_y,
                       Pad pad);

}  // namespace qfca

#endif  // QFCA_FILTERS_HPP
