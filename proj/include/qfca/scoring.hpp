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
#ifndef QFCA_SCORING_HPP
#define QFCA_SCORING_HPP

// End-to-end anomaly map. For every channel:
//   quantize -> T x T patch histograms -> global reference ->
//   per-bin transport errors for every patch -> spread each bin's error back
//   over the window (box or Gaussian) and read it at the pixel's own bin
// then average over channels and blur the result.

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "qfca/features.hpp"
#include "qfca/grid.hpp"
#include "qfca/quantize.hpp"
#include "qfca/tensor_io.hpp"

namespace qfca {

struct PipelineConfig {
  int n_bins = 16;
  int patch_size = 9;
  // infinity selects the uniform T x T average
  double sigma_p = std::numeric_limits<double>::infinity();
  double sigma_s = 1.0;
  // 0 disables the PCA residual preprocessing
  int pca_components = 0;
  ReferenceMode reference = ReferenceMode::kMedianQuan;
  int sample_budget = 4096;
  // negative means patch_size / 2
  int border_exclusion = -1;
  Pad pad = Pad::kReflect;

  int border() const noexcept {
    return border_exclusion < 0 ? patch_size / 2 : border_exclusion;
  }
  void validate() const;
};

/// C x N x H x W per-bin error planes.
struct ErrorMaps {
  int channels = 0;
  int n_bins = 0;
  int height = 0;
  int width = 0;
  std::vector<float> values;

  std::size_t plane_size() const noexcept {
    return static_cast<std::size_t>(height) * width;
  }
  float at(int c, int bin, int y, int x) const noexcept {
    return values[(static_cast<std::size_t>(c) * n_bins + bin) * plane_size() +
                  static_cast<std::size_t>(y) * width + x];
  }
};

struct StageTimings {
  double pca_ms = 0;
  double quantize_ms = 0;
  double histogram_ms = 0;
  double reference_ms = 0;
  double transport_ms = 0;
  double associate_ms = 0;
  double aggregate_ms = 0;
  double smooth_ms = 0;
  double total_ms = 0;
};

struct AnomalyMap {
  Plane scores;  // feature resolution
  float image_score = 0;
  int scale = 1;
  bool all_degenerate = false;
};

/// Per-location transport of every channel's patch histogram against its
/// reference (rescaled to the patch mass). Degenerate channels give zeros.
ErrorMaps bin_error_maps(const HistogramField& hf, const ReferenceHistogram& ref,
                         const Quantizer& q);

/// Spreads each bin's error over the T x T window (uniform when sigma_p is
/// infinite, else a normalized Gaussian of size T) and reads the result at
/// each pixel's own bin. Returns C x H x W.
FeatureMap associate_errors(const ErrorMaps& errors, const BinIndexMap& bins,
                            const PipelineConfig& config);

struct ChannelAverage {
  Plane map;
  bool all_degenerate = false;
};

/// Mean over the non-degenerate channels (`degenerate` may be empty).
ChannelAverage aggregate_channels(const FeatureMap& scores,
                                  std::span<const std::uint8_t> degenerate = {});

/// Gaussian blur with radius ceil(3 sigma); sigma == 0 is the identity.
Plane smooth_scores(const Plane& map, double sigma_s, Pad pad = Pad::kReflect);

/// Maximum over pixels at least `border` away from every edge (all pixels if
/// that leaves nothing).
float max_interior(const Plane& map, int border);

AnomalyMap detect(const FeatureMap& f, const PipelineConfig& config,
                  StageTimings* timings = nullptr);

/// Bilinear (half-pixel centres) resize of the score map to image resolution.
Plane upsample_scores(const AnomalyMap& map, ImageSize size);

}  // namespace qfca

#endif  // QFCA_SCORING_HPP
