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
#ifndef QFCA_METRICS_HPP
#define QFCA_METRICS_HPP

// Segmentation and detection metrics. All pixel metrics pool the non-border
// pixels of every sample of a class. Scores only matter through their order,
// so every metric is invariant under strictly increasing transforms.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qfca/grid.hpp"

namespace qfca {

struct EvalSample {
  Plane scores;
  Mask mask;  // 0 / 1
  bool anomalous = false;
  int border = 0;  // pixels dropped on every side
};

/// Throws ArgumentError on shape mismatch or a border that leaves nothing.
void check_sample(const EvalSample& s);

/// Mann-Whitney AUROC with tie-averaged ranks; nullopt without both labels.
std::optional<double> auroc(std::span<const float> scores,
                            std::span<const std::uint8_t> labels);

std::optional<double> auroc_pixel(std::span<const EvalSample> samples);

struct Components {
  Grid<int> labels;  // 0 background, 1..count in raster order of first pixel
  int count = 0;
};

Components connected_components(const Mask& mask);

/// Number of distinct thresholds pro_at_fpr uses.
inline constexpr int kProThresholds = 500;

/// Normalized area under the per-region-overlap curve for FPR <= fpr_limit.
/// nullopt when no ground-truth component survives border exclusion or
/// there are no normal pixels.
std::optional<double> pro_at_fpr(std::span<const EvalSample> samples,
                                 double fpr_limit = 0.3,
                                 int n_thresholds = kProThresholds);

struct F1Result {
  double f1 = 0;
  float threshold = 0;  // predict anomalous when score >= threshold
};

std::optional<F1Result> f1_optimal(std::span<const float> scores,
                                   std::span<const std::uint8_t> labels);
std::optional<F1Result> f1_optimal(std::span<const EvalSample> samples);

/// Border-excluded maximum per image, tie-averaged AUROC over images.
std::optional<double> auroc_image(std::span<const EvalSample> samples);

struct MetricReport {
  std::string name;
  std::optional<double> pro;
  std::optional<double> auroc_s;
  std::optional<double> f1;
  std::optional<double> auroc_c;
  int n_images = 0;
  int n_thresholds = kProThresholds;
};

MetricReport evaluate_samples(std::string name, std::span<const EvalSample> samples,
                              double fpr_limit = 0.3);

/// Mean of the defined values of each metric over the classes.
MetricReport mean_report(std::span<const MetricReport> classes);

/// {"<class>": {"pro":..,"auroc_s":..,"f1":..,"auroc_c":..,"n_images":..},
///  ..., "mean": {...}} with absent metrics written as null.
std::string report_json(std::span<const MetricReport> classes);

}  // namespace qfca

#endif  // QFCA_METRICS_HPP
