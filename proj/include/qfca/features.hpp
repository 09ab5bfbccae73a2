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
#ifndef QFCA_FEATURES_HPP
#define QFCA_FEATURES_HPP

#include <filesystem>
#include <span>
#include <vector>

#include "qfca/grid.hpp"
#include "qfca/tensor_io.hpp"

namespace qfca {

/// Dense CxHxW feature tensor. `scale` is the downsampling factor relative to
/// the image the features were computed from.
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  int scale = 1;
  std::vector<float> values;

  FeatureMap() = default;
  FeatureMap(int c, int h, int w, int s = 1)
      : channels(c), height(h), width(w), scale(s),
        values(static_cast<std::size_t>(c) * h * w, 0.0f) {}

  std::size_t plane_size() const noexcept {
    return static_cast<std::size_t>(height) * width;
  }
  std::span<float> channel(int c) noexcept {
    return {values.data() + c * plane_size(), plane_size()};
  }
  std::span<const float> channel(int c) const noexcept {
    return {values.data() + c * plane_size(), plane_size()};
  }
  float& at(int c, int y, int x) noexcept {
    return values[c * plane_size() + static_cast<std::size_t>(y) * width + x];
  }
  float at(int c, int y, int x) const noexcept {
    return values[c * plane_size() + static_cast<std::size_t>(y) * width + x];
  }
  Plane channel_plane(int c) const;
};

/// Training-free filter bank. Channel order, for each colour R, G, B:
///   identity,
///   blur(s) for s in sigmas,
///   d/dx(s), d/dy(s) for s in sigmas,
///   laplacian(s) for s in sigmas   (only when `laplacian` is set)
/// followed by scale x scale block averaging. The default configuration
/// gives 30 channels at 1/4 resolution.
struct FilterBankConfig {
  int scale = 4;
  std::vector<double> sigmas = {1.0, 2.0, 4.0};
  bool laplacian = false;
};

int filterbank_channels(const FilterBankConfig& config);
FeatureMap extract_filterbank(const Tensor& image, const FilterBankConfig& config = {});

/// Reads a QTF1 float32 [C, H, W] tensor. The scale comes from a sidecar JSON
/// {"scale": s} at `<path>.json` or `<stem>.json`, defaulting to 8.
FeatureMap load_external_features(const std::filesystem::path& path);
FeatureMap feature_map_from_tensor(const Tensor& t, int scale);
Tensor to_tensor(const FeatureMap& f);

struct PcaModel {
  int dims = 0;                     // C
  std::vector<double> mean;         // C
  std::vector<double> components;   // k x C, orthonormal rows
  std::vector<double> eigenvalues;  // k, non-increasing
  int rank() const noexcept { return static_cast<int>(eigenvalues.size()); }
};

/// Treats the HxW pixels as C-dimensional samples; population covariance,
/// top-k eigenpairs. Each component's largest-magnitude entry is positive.
PcaModel pca_fit(const FeatureMap& f, int k);

/// Per pixel: (x - mean) - V^T V (x - mean).
FeatureMap pca_residual(const FeatureMap& f, const PcaModel& model);

}  // namespace qfca

#endif  // QFCA_FEATURES_HPP
