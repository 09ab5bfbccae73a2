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
#include "qfca/harness.hpp"

#include <cmath>

#include "qfca/error.hpp"
#include "qfca/tensor_io.hpp"

namespace qfca {

namespace fs = std::filesystem;

std::vector<EvalSample> score_class(const fs::path& root, const std::string& class_name,
                                    const EvalOptions& options,
                                    std::vector<ImageResult>* images) {
  const DatasetIndex index = load_dataset(root, class_name);
  if (index.samples.empty()) throw IndexError("class '" + class_name + "' has no images");
  std::vector<EvalSample> samples;
  samples.reserve(index.samples.size());
  for (const auto& entry : index.samples) {
    const Tensor image = load_image(entry.image_path, options.resize);
    const ImageSize size{static_cast<int>(image.shape()[1]),
                         static_cast<int>(image.shape()[2])};
    FeatureMap f;
    if (options.features_dir) {
      f = load_external_features(*options.features_dir / class_name / entry.defect_type /
                                 (entry.image_path.stem().string() + ".qtf"));
    } else {
      f = extract_filterbank(image, options.bank);
    }
    StageTimings timings;
    const AnomalyMap map = detect(f, options.pipeline, &timings);

    EvalSample s;
    s.scores = upsample_scores(map, size);
    s.mask = entry.mask_path ? load_mask(*entry.mask_path, size)
                             : Mask(size.height, size.width, 0);
    s.anomalous = entry.is_anomalous;
    const double ratio = static_cast<double>(size.height) / f.height;
    s.border = static_cast<int>(std::lround(options.pipeline.border() * ratio));
    samples.push_back(std::move(s));
    if (images)
      images->push_back({entry.image_path.string(), entry.defect_type, map.image_score, timings});
  }
  return samples;
}

ClassResult evaluate_class(const fs::path& root, const std::string& class_name,
                           const EvalOptions& options) {
  ClassResult result;
  const auto samples = score_class(root, class_name, options, &result.images);
  result.report = evaluate_samples(class_name, samples, options.fpr_limit);
  return result;
}

}  // namespace qfca
