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
#include "qfca/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qfca/error.hpp"

namespace qfca {

namespace {

constexpr double kSlack = 1e-9;

double total(std::span<const double> w) { return std::accumulate(w.begin(), w.end(), 0.0); }

void validate(std::span<const double> patch, std::span<const double> reference,
              std::span<const double> centers) {
  const std::size_t n = centers.size();
  if (n == 0 || patch.size() != n || reference.size() != n)
    throw ArgumentError("patch, reference and centres must have the same non-zero length");
  for (std::size_t i = 1; i < n; ++i)
    if (!(centers[i] > centers[i - 1]))
      throw ArgumentError("bin centres must be strictly increasing");
  for (std::size_t i = 0; i < n; ++i)
    if (patch[i] < 0 || reference[i] < 0) throw ArgumentError("negative histogram weight");
  const double mp = total(patch), mr = total(reference);
  if (std::abs(mp - mr) > 1e-6 * std::max({mp, mr, 1e-300}))
    throw MassError("patch mass " + std::to_string(mp) + " != reference mass " +
                    std::to_string(mr));
}

}  // namespace

int quantized_mismatch_into(std::span<const double> patch,
                            std::span<const double> reference,
                            std::span<const double> centers, std::span<double> errors,
                            std::span<double> scratch) {
  const int n = static_cast<int>(centers.size());
  double* p = scratch.data();
  double* r = scratch.data() + n;
  std::copy(patch.begin(), patch.end(), p);
  std::copy(reference.begin(), reference.end(), r);
  std::fill(errors.begin(), errors.end(), 0.0);
  const double eps = kSlack * total(patch);

  int steps = 0;
  int i = 0, j = 0;
  while (i < n && j < n) {
    ++steps;
    const double dist = std::abs(centers[i] - centers[j]);
    if (p[i] < r[j] - eps) {
      errors[i] += p[i] * dist;
      r[j] -= p[i];
      ++i;
    } else {
      errors[i] += r[j] * dist;
      p[i] -= r[j];
      ++j;
    }
  }
  for (int b = 0; b < n; ++b) errors[b] = patch[b] > 0 ? errors[b] / patch[b] : 0.0;
  return steps;
}

BinErrors quantized_mismatch(std::span<const double> patch,
                             std::span<const double> reference,
                             std::span<const double> centers, int* iterations) {
  validate(patch, reference, centers);
  BinErrors errors(centers.size());
  std::vector<double> scratch(2 * centers.size());
  const int steps = quantized_mismatch_into(patch, reference, centers, errors, scratch);
  if (iterations) *iterations = steps;
  return errors;
}

SparseReference make_sparse_reference(std::span<const double> weights, double scale) {
  SparseReference ref;
  for (std::size_t b = 0; b < weights.size(); ++b) {
    if (weights[b] == 0.0) continue;
    ref.bins.push_back(static_cast<int>(b));
    ref.weights.push_back(weights[b] * scale);
    ref.mass += weights[b] * scale;
  }
  return ref;
}

void sparse_mismatch_list(const int* bins, const float* counts, int m,
                          const SparseReference& reference, std::span<const double> centers,
                          float* errors) {
  double mass = 0.0;
  for (int k = 0; k < m; ++k) mass += counts[k];
  const double eps = kSlack * mass;
  const int n_ref = static_cast<int>(reference.bins.size());
  int i = 0, j = 0;
  double p = m > 0 ? counts[0] : 0.0;
  double r = n_ref > 0 ? reference.weights[0] : 0.0;
  double acc = 0.0;
  while (i < m && j < n_ref) {
    const double dist = std::abs(centers[bins[i]] - centers[reference.bins[j]]);
    if (p < r - eps) {
      acc += p * dist;
      r -= p;
      errors[i] = static_cast<float>(acc / counts[i]);
      acc = 0.0;
      if (++i < m) p = counts[i];
    } else {
      acc += r * dist;
      p -= r;
      if (++j < n_ref) r = reference.weights[j];
    }
  }
  // Reference exhausted: the current bin keeps what it accumulated; any
  // later bins only hold rounding residue.
  if (i < m) {
    errors[i] = static_cast<float>(acc / counts[i]);
    for (int k = i + 1; k < m; ++k) errors[k] = 0.0f;
  }
}

void sparse_mismatch(const float* patch, std::size_t stride, int n_bins,
                     const SparseReference& reference, std::span<const double> centers,
                     float* errors) {
  thread_local std::vector<int> bins;
  thread_local std::vector<float> counts, out;
  bins.clear();
  counts.clear();
  for (int b = 0; b < n_bins; ++b)
    if (patch[b * stride] != 0.0f) {
      bins.push_back(b);
      counts.push_back(patch[b * stride]);
    }
  out.resize(bins.size());
  sparse_mismatch_list(bins.data(), counts.data(), static_cast<int>(bins.size()), reference,
                       centers, out.data());
  for (int b = 0; b < n_bins; ++b) errors[b * stride] = 0.0f;
  for (std::size_t k = 0; k < bins.size(); ++k) errors[bins[k] * stride] = out[k];
}

std::vector<double> sorted_mismatch_oracle(std::span<const double> x,
                                           std::span<const double> y) {
  if (x.size() != y.size()) throw ArgumentError("oracle inputs must have equal length");
  const std::size_t m = x.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ys(y.begin(), y.end());
  std::sort(ys.begin(), ys.end());

  std::vector<double> err(m);
  for (std::size_t k = 0; k < m; ++k) err[order[k]] = std::abs(x[order[k]] - ys[k]);
  // equal x values form contiguous runs in sorted order
  for (std::size_t lo = 0; lo < m;) {
    std::size_t hi = lo + 1;
    while (hi < m && x[order[hi]] == x[order[lo]]) ++hi;
    double sum = 0.0;
    for (std::size_t k = lo; k < hi; ++k) sum += err[order[k]];
    const double mean = sum / static_cast<double>(hi - lo);
    for (std::size_t k = lo; k < hi; ++k) err[order[k]] = mean;
    lo = hi;
  }
  return err;
}

double wasserstein1_histogram(std::span<const double> patch,
                              std::span<const double> reference,
                              std::span<const double> centers) {
  validate(patch, reference, centers);
  double cdf_p = 0.0, cdf_r = 0.0, w1 = 0.0;
  for (std::size_t i = 0; i + 1 < centers.size(); ++i) {
    cdf_p += patch[i];
    cdf_r += reference[i];
    w1 += std::abs(cdf_p - cdf_r) * (centers[i + 1] - centers[i]);
  }
  return w1;
}

double wasserstein2_squared(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ArgumentError("W2 inputs must have equal length");
  std::vector<double> xs(x.begin(), x.end()), ys(y.begin(), y.end());
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  double s = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) s += (xs[k] - ys[k]) * (xs[k] - ys[k]);
  return s;
}

double w2sq_gradient_check(std::span<const double> x, std::span<const double> y,
                           double h) {
  std::vector<double> xs(x.begin(), x.end());
  std::sort(xs.begin(), xs.end());
  for (std::size_t k = 1; k < xs.size(); ++k)
    if (xs[k] - xs[k - 1] <= 10 * h)
      throw IllConditioned("entries of x closer than 10h; sorted matching is unstable");

  const std::vector<double> oracle = sorted_mismatch_oracle(x, y);
  std::vector<double> probe(x.begin(), x.end());
  double worst = 0.0;
  for (std::size_t k = 0; k < probe.size(); ++k) {
    const double keep = probe[k];
    probe[k] = keep + h;
    const double up = wasserstein2_squared(probe, y);
    probe[k] = keep - h;
    const double down = wasserstein2_squared(probe, y);
    probe[k] = keep;
    const double fd = (up - down) / (2 * h);
    worst = std::max(worst, std::abs(std::abs(fd) - 2 * oracle[k]));
  }
  return worst;
}

}  // namespace qfca
