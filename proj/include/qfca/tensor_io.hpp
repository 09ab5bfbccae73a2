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
#ifndef QFCA_TENSOR_IO_HPP
#define QFCA_TENSOR_IO_HPP

// QTF1 tensor files, PNG/PPM image decoding and MVTec-style dataset indexing.
//
// QTF1 layout (little-endian, no padding):
//   "QTF1" | dtype u8 (1 = float32, 2 = uint8) | ndim u8 | ndim x u64 dims |
//   row-major element data

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qfca/grid.hpp"

namespace qfca {

enum class DType : std::uint8_t { kFloat32 = 1, kUInt8 = 2 };

std::size_t element_size(DType dtype);

class Tensor {
 public:
  Tensor() = default;
  Tensor(std::vector<std::size_t> shape, std::vector<float> values);
  Tensor(std::vector<std::size_t> shape, std::vector<std::uint8_t> values);

  DType dtype() const noexcept {
    return std::holds_alternative<std::vector<float>>(data_) ? DType::kFloat32
                                                             : DType::kUInt8;
  }
  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t ndim() const noexcept { return shape_.size(); }
  std::size_t numel() const noexcept;

  // Throw ArgumentError when the dtype does not match.
  std::span<const float> floats() const;
  std::span<float> floats();
  std::span<const std::uint8_t> bytes() const;

  bool operator==(const Tensor&) const = default;

 private:
  void validate() const;

  std::vector<std::size_t> shape_;
  std::variant<std::vector<float>, std::vector<std::uint8_t>> data_;
};

std::vector<std::uint8_t> encode_tensor(const Tensor& t);
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

void write_tensor(const Tensor& t, const std::filesystem::path& path);
Tensor read_tensor(const std::filesystem::path& path);

enum class Resize { kNearest, kBilinear };

struct ImageSize {
  int height = 0;
  int width = 0;
};

/// Decodes a PNG or binary PPM/PGM into a 3xHxW float32 tensor in [0, 1],
/// channels R, G, B. Grayscale input is replicated to all three channels.
Tensor load_image(const std::filesystem::path& path,
                  std::optional<ImageSize> size = std::nullopt,
                  Resize mode = Resize::kBilinear);

/// Resamples every channel of a CxHxW tensor with half-pixel-center alignment.
Tensor resize_image(const Tensor& image, ImageSize size, Resize mode);
Plane resize_plane(const Plane& plane, ImageSize size, Resize mode);

/// Loads a mask image as binary (value > 0). Resizing uses nearest neighbour.
Mask load_mask(const std::filesystem::path& path,
               std::optional<ImageSize> size = std::nullopt);

void write_png(const std::filesystem::path& path, const Tensor& rgb);
void write_png(const std::filesystem::path& path, const Grid<std::uint8_t>& gray);
/// 8-bit PGM, min-max normalized; a constant plane maps to all zeros.
void write_pgm(const std::filesystem::path& path, const Plane& plane);

struct DatasetSample {
  std::filesystem::path image_path;
  std::optional<std::filesystem::path> mask_path;
  bool is_anomalous = false;
  std::string defect_type;
};

struct DatasetIndex {
  std::string class_name;
  std::vector<DatasetSample> samples;
};

enum class Layout { kMvtec };

/// Indexes root/class/test/<defect>/*.png, masks from
/// root/class/ground_truth/<defect>/<stem>_mask.png. Samples are ordered by
/// defect name then file name.
DatasetIndex load_dataset(const std::filesystem::path& root,
                          const std::string& class_name,
                          Layout layout = Layout::kMvtec);

}  // namespace qfca

#endif  // QFCA_TENSOR_IO_HPP
