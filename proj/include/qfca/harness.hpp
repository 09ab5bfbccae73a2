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
#ifndef QFCA_HARNESS_HPP
#define QFCA_HARNESS_HPP

// Dataset evaluation: features -> detect -> upsample -> metrics, per class.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qfca/features.hpp"
#include "qfca/metrics.hpp"
#include "qfca/scoring.hpp"

namespace qfca {

struct EvalOptions {
  PipelineConfig pipeline;
  FilterBankConfig bank;
  // precomputed features at <dir>/<class>/<defect>/<stem>.qtf
  std::optional<std::filesystem::path> features_dir;
  std::optional<ImageSize> resize;
  double fpr_limit = 0.3;
};

struct ImageResult {
  std::string path;
  std::string defect;
  float image_score = 0;
  StageTimings timings;
};

struct ClassResult {
  MetricReport report;
  std::vector<ImageResult> images;
};

/// Samples keep the scores at image resolution; the border (in feature
/// pixels) is scaled to image pixels.
std::vector<EvalSample> score_class(const std::filesystem::path& root,
                                    const std::string& class_name, const EvalOptions& options,
                                    std::vector<ImageResult>* images = nullptr);

ClassResult evaluate_class(const std::filesystem::path& root, const std::string& class_name,
                           const EvalOptions& options);

}  // namespace qfca

#endif  // QFCA_HARNESS_HPP
