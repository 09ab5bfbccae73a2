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
#ifndef QFCA_SYNTH_HPP
#define QFCA_SYNTH_HPP

// Seeded stationary textures with planted anomalies and exact masks, written
// in the MVTec directory layout.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "qfca/grid.hpp"
#include "qfca/tensor_io.hpp"

namespace qfca {

enum class TextureKind { kTiles, kNoise, kStripes };
enum class AnomalyKind { kSquare, kBlob };
// contrast: brightness/colour shift inside the region; swap: a foreign texture
enum class AnomalyFill { kContrast, kSwap };

TextureKind parse_texture_kind(std::string_view name);
AnomalyKind parse_anomaly_kind(std::string_view name);
std::string_view to_string(TextureKind kind);
std::string_view to_string(AnomalyKind kind);
std::string_view to_string(AnomalyFill fill);

struct SynthConfig {
  TextureKind kind = TextureKind::kNoise;
  AnomalyKind anomaly = AnomalyKind::kSquare;
  int size = 256;
  std::uint64_t seed = 7;
  double anomaly_frac = 0.03;  // of the image area
  int count = 10;              // test images per class
  int good = 2;                // of which anomaly-free
};

struct SynthImage {
  Tensor rgb;  // 3 x size x size in [0, 1]
  Mask mask;   // 0 / 1
  AnomalyFill fill = AnomalyFill::kContrast;
};

/// Image `index` of the class; anomalous images alternate contrast / swap.
SynthImage synth_image(const SynthConfig& config, int index, bool anomalous);

/// Writes root/<class>/test/{good,contrast,swap}/NNN.png and the matching
/// root/<class>/ground_truth/<defect>/NNN_mask.png (0 / 255). The class name
/// defaults to the texture kind.
void write_synth_dataset(const SynthConfig& config, const std::filesystem::path& root,
                         std::string class_name = {});

}  // namespace qfca

#endif  // QFCA_SYNTH_HPP
