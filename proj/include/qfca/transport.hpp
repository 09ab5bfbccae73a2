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
#ifndef QFCA_TRANSPORT_HPP
#define QFCA_TRANSPORT_HPP

// One-dimensional optimal transport between a patch histogram P and a
// reference histogram R on shared, increasing bin centres Q.
//
// The two-pointer walk below matches the mass of P and R in sorted order.
// Each step moves min(P_i, R_j) units between bins i and j and charges
// min(P_i, R_j) * |Q_i - Q_j| to bin i; the pointer with the smaller weight
// advances and the moved mass is removed from the other bin. Dividing each
// bin's charge by its original weight gives the mean per-element cost of the
// bin, i.e. exactly what sorting the expanded values and averaging the
// per-rank errors over duplicates would give. The walk ends after at most
// 2N - 1 steps.

#include <cstddef>
#include <span>
#include <vector>

namespace qfca {

/// Per-bin mismatch scores E (mean transport cost of the elements of a bin).
using BinErrors = std::vector<double>;

/// Checked entry point: validates mass balance (1e-6 relative) and strictly
/// increasing centres, then runs the walk. `iterations`, when given, receives
/// the number of loop steps taken.
BinErrors quantized_mismatch(std::span<const double> patch,
                             std::span<const double> reference,
                             std::span<const double> centers, int* iterations = nullptr);

/// Unchecked walk over caller-provided buffers (no allocation). `scratch`
/// needs 2N doubles; `errors` receives N values. Returns the step count.
int quantized_mismatch_into(std::span<const double> patch,
                            std::span<const double> reference,
                            std::span<const double> centers, std::span<double> errors,
                            std::span<double> scratch);

/// Reference histogram restricted to its non-empty bins, for the hot loop.
struct SparseReference {
  std::vector<int> bins;
  std::vector<double> weights;
  double mass = 0.0;
};

SparseReference make_sparse_reference(std::span<const double> weights, double scale = 1.0);

/// Same walk as quantized_mismatch_into but skipping empty bins on both
/// sides, which leaves every result bit-identical. The patch histogram is
/// read as patch[i * stride] and bin errors written to errors[i * stride],
/// matching a CxNxHxW plane layout. Empty patch bins get error 0. `errors`
/// may alias `patch`: each bin is read before it is written.
void sparse_mismatch(const float* patch, std::size_t stride, int n_bins,
                     const SparseReference& reference, std::span<const double> centers,
                     float* errors);

/// The same walk over an explicit list of the non-empty patch bins
/// (`bins` increasing, `counts` > 0); errors[k] belongs to bins[k].
void sparse_mismatch_list(const int* bins, const float* counts, int m,
                          const SparseReference& reference, std::span<const double> centers,
                          float* errors);

/// Sorting-based per-element mismatch: match x and y in sorted order, take
/// |x - y| per rank, then average the errors over groups of equal x values.
/// Errors are returned in the original order of x.
std::vector<double> sorted_mismatch_oracle(std::span<const double> x,
                                           std::span<const double> y);

/// Closed-form W1 between two histograms on the same support.
double wasserstein1_histogram(std::span<const double> patch,
                              std::span<const double> reference,
                              std::span<const double> centers);

/// Squared 2-Wasserstein distance between equal-size samples.
double wasserstein2_squared(std::span<const double> x, std::span<const double> y);

/// max_k | |dW2^2/dx_k| (central differences, step h) - 2 * oracle_k |.
/// Throws IllConditioned if two entries of x are closer than 10 h.
double w2sq_gradient_check(std::span<const double> x, std::span<const double> y,
                           double h = 1e-4);

}  // namespace qfca

#endif  // QFCA_TRANSPORT_HPP
