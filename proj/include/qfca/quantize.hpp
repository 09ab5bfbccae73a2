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
#ifndef QFCA_QUANTIZE_HPP
#define QFCA_QUANTIZE_HPP

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "qfca/features.hpp"
#include "qfca/grid.hpp"
#include "qfca/pooling.hpp"

namespace qfca {

/// N equally spaced bins per channel over [lo, hi]; centre i (0-based) is
/// lo + (i + 1/2) (hi - lo) / N.
struct Quantizer {
  int n_bins = 0;
  std::vector<float> lo;
  std::vector<float> hi;
  std::vector<std::uint8_t> degenerate;  // lo == hi: channel carries no signal

  int channels() const noexcept { return static_cast<int>(lo.size()); }
  std::vector<double> centers(int channel) const;
  int bin(int channel, float value) const noexcept;
};

struct BinIndexMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  int n_bins = 1;
  std::vector<std::uint16_t> bins;

  std::size_t plane_size() const noexcept {
    return static_cast<std::size_t>(height) * width;
  }
  std::span<const std::uint16_t> channel(int c) const noexcept {
    return {bins.data() + c * plane_size(), plane_size()};
  }
};

/// counts[((c * N + i) * H + y) * W + x]: number of pixels of bin i in the
/// T x T window around (y, x) of channel c.
struct HistogramField {
  int channels = 0;
  int n_bins = 0;
  int height = 0;
  int width = 0;
  int patch_size = 0;
  std::vector<float> counts;

  std::size_t plane_size() const noexcept {
    return static_cast<std::size_t>(height) * width;
  }
  float at(int c, int bin, int y, int x) const noexcept {
    return counts[(static_cast<std::size_t>(c) * n_bins + bin) * plane_size() +
                  static_cast<std::size_t>(y) * width + x];
  }
};

/// Per-channel reference weights; each channel sums to T^2.
struct ReferenceHistogram {
  int channels = 0;
  int n_bins = 0;
  int patch_size = 0;
  std::vector<double> weights;  // C x N

  std::span<const double> channel(int c) const noexcept {
    return {weights.data() + static_cast<std::size_t>(c) * n_bins,
            static_cast<std::size_t>(n_bins)};
  }
};

/// How the global reference is built from the sampled patches.
///   kMedianQuan: per-rank median of the sorted values, then quantize.
///   kMeanQuan:   per-rank mean, then quantize.
///   kQuanMedian: per-bin median of patch histograms, rescaled to T^2.
///   kQuanMean:   per-bin mean of patch histograms, rescaled to T^2.
enum class ReferenceMode { kMedianQuan, kMeanQuan, kQuanMedian, kQuanMean };

ReferenceMode parse_reference_mode(std::string_view name);
std::string_view to_string(ReferenceMode mode);

Quantizer fit_quantizer(const FeatureMap& f, int n_bins);

/// clamp(floor((v - lo) N / (hi - lo)), 0, N - 1); degenerate channels map to 0.
BinIndexMap bin_indices(const FeatureMap& f, const Quantizer& q);

/// Only reflect and wrap keep every window at full mass T^2.
HistogramField patch_histograms(const BinIndexMap& bins, int patch_size,
                                Pad pad = Pad::kReflect);

/// Histogram planes of one channel into `out` (N x H x W), using `filter` and
/// `indicator` (H x W) as scratch.
void channel_histograms(const BinIndexMap& bins, int channel, int n_bins, int patch_size,
                        Pad pad, BoxFilter& filter, std::vector<float>& indicator,
                        std::span<float> out);

struct Location {
  int y = 0;
  int x = 0;
};

/// Deterministic uniform grid of at most `budget` locations. When H and W
/// are multiples of the stride the grid is invariant under toroidal shifts
/// by multiples of the stride.
std::vector<Location> sample_grid(int height, int width, int budget);

/// Full-precision reference values of one channel: the T^2 sorted values of
/// each sampled patch, reduced per rank by lower median (or mean).
enum class RankStatistic { kMedian, kMean };
std::vector<double> rank_reference_values(std::span<const float> channel, int height,
                                          int width, int patch_size,
                                          std::span<const Location> samples,
                                          RankStatistic stat, Pad pad = Pad::kReflect);

/// Histogram-domain reference for one channel from the sampled patch
/// histograms (`sampled` is N x S: counts[b * S + s]). Valid for kMedianQuan (the lower
/// median commutes with the monotone value-to-bin map, so the per-rank median
/// of bin indices equals the bin of the per-rank median), kQuanMedian and
/// kQuanMean.
std::vector<double> reference_from_histograms(std::span<const int> sampled, int n_bins,
                                              int patch_size, ReferenceMode mode);

ReferenceHistogram select_reference(const FeatureMap& f, const Quantizer& q, int patch_size,
                                    ReferenceMode mode = ReferenceMode::kMedianQuan,
                                    int sample_budget = 4096, Pad pad = Pad::kReflect);

}  // namespace qfca

#endif  // QFCA_QUANTIZE_HPP
