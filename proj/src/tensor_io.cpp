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
#include "qfca/tensor_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <iterator>
#include <numeric>

#include "qfca/error.hpp"

namespace qfca {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little,
              "QTF1 I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'Q', 'T', 'F', '1'};

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(path, "write failed");
}

// Source coordinate of output sample `i` under half-pixel-center alignment.
double source_coord(int i, int out_n, int in_n) {
  return (i + 0.5) * static_cast<double>(in_n) / out_n - 0.5;
}

}  // namespace

std::size_t element_size(DType dtype) {
  switch (dtype) {
    case DType::kFloat32:
      return 4;
    case DType::kUInt8:
      return 1;
  }
  throw FormatError(FormatError::Kind::kUnsupportedDtype, "unknown dtype");
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<float> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  validate();
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<std::uint8_t> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  validate();
}

std::size_t Tensor::numel() const noexcept {
  return std::accumulate(shape_.begin(), shape_.end(), std::size_t{1},
                         std::multiplies<>());
}

void Tensor::validate() const {
  if (shape_.empty() || shape_.size() > 4)
    throw ArgumentError("tensor rank must be in [1, 4]");
  for (auto d : shape_)
    if (d == 0) throw ArgumentError("tensor dimensions must be >= 1");
  const std::size_t n = std::visit([](const auto& v) { return v.size(); }, data_);
  if (n != numel()) throw ArgumentError("tensor data length does not match shape");
}

std::span<const float> Tensor::floats() const {
  if (dtype() != DType::kFloat32) throw ArgumentError("tensor is not float32");
  return std::get<std::vector<float>>(data_);
}

std::span<float> Tensor::floats() {
  if (dtype() != DType::kFloat32) throw ArgumentError("tensor is not float32");
  return std::get<std::vector<float>>(data_);
}

std::span<const std::uint8_t> Tensor::bytes() const {
  if (dtype() != DType::kUInt8) throw ArgumentError("tensor is not uint8");
  return std::get<std::vector<std::uint8_t>>(data_);
}

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  const std::size_t payload = t.numel() * element_size(t.dtype());
  std::vector<std::uint8_t> out;
  out.reserve(6 + 8 * t.ndim() + payload);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  out.push_back(static_cast<std::uint8_t>(t.dtype()));
  out.push_back(static_cast<std::uint8_t>(t.ndim()));
  for (std::uint64_t d : t.shape())
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(d >> (8 * b)));
  const std::size_t offset = out.size();
  out.resize(offset + payload);
  if (t.dtype() == DType::kFloat32)
    std::memcpy(out.data() + offset, t.floats().data(), payload);
  else
    std::memcpy(out.data() + offset, t.bytes().data(), payload);
  return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
  using Kind = FormatError::Kind;
  if (bytes.size() < 6 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw FormatError(Kind::kBadMagic, "not a QTF1 file");
  const std::uint8_t code = bytes[4];
  if (code != 1 && code != 2)
    throw FormatError(Kind::kUnsupportedDtype,
                      "unsupported dtype code " + std::to_string(code));
  const auto dtype = static_cast<DType>(code);
  const std::size_t ndim = bytes[5];
  if (ndim < 1 || ndim > 4)
    throw FormatError(Kind::kShape, "rank " + std::to_string(ndim) + " out of range");
  if (bytes.size() < 6 + 8 * ndim) throw FormatError(Kind::kTruncated, "truncated header");

  std::vector<std::size_t> shape(ndim);
  std::size_t numel = 1;
  for (std::size_t i = 0; i < ndim; ++i) {
    std::uint64_t d = 0;
    for (int b = 0; b < 8; ++b)
      d |= static_cast<std::uint64_t>(bytes[6 + 8 * i + b]) << (8 * b);
    if (d == 0) throw FormatError(Kind::kShape, "zero-sized dimension");
    shape[i] = d;
    numel *= d;
  }
  const std::size_t offset = 6 + 8 * ndim;
  const std::size_t payload = numel * element_size(dtype);
  if (bytes.size() < offset + payload)
    throw FormatError(Kind::kTruncated, "payload holds " +
                                            std::to_string(bytes.size() - offset) +
                                            " bytes, expected " + std::to_string(payload));
  if (bytes.size() > offset + payload)
    throw FormatError(Kind::kTruncated, "trailing bytes after payload");

  if (dtype == DType::kFloat32) {
    std::vector<float> values(numel);
    std::memcpy(values.data(), bytes.data() + offset, payload);
    return Tensor(std::move(shape), std::move(values));
  }
  std::vector<std::uint8_t> values(bytes.begin() + offset, bytes.end());
  return Tensor(std::move(shape), std::move(values));
}

void write_tensor(const Tensor& t, const fs::path& path) {
  write_file(path, encode_tensor(t));
}

Tensor read_tensor(const fs::path& path) {
  const auto bytes = read_file(path);
  return decode_tensor(bytes);
}

// ---------------------------------------------------------------------------
// Images

namespace {

struct Decoded8 {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1 or 3
  std::vector<std::uint8_t> pixels;
};

bool is_png(std::span<const std::uint8_t> b) {
  static constexpr std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return b.size() >= 8 && std::equal(std::begin(sig), std::end(sig), b.begin());
}

Decoded8 decode_png(const fs::path& path, std::span<const std::uint8_t> bytes,
                    bool gray) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    throw DecodeError(path.string() + ": " + image.message);
  const bool source_gray = (image.format & PNG_FORMAT_FLAG_COLOR) == 0;
  Decoded8 out;
  out.width = static_cast<int>(image.width);
  out.height = static_cast<int>(image.height);
  out.channels = (gray || source_gray) ? 1 : 3;
  image.format = out.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  out.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw DecodeError(path.string() + ": " + msg);
  }
  return out;
}

// Binary PNM (P5 gray / P6 RGB), maxval <= 255.
Decoded8 decode_pnm(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::size_t pos = 2;
  auto next_int = [&]() -> long {
    for (;;) {
      while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    if (pos >= bytes.size() || !std::isdigit(bytes[pos]))
      throw DecodeError(path.string() + ": malformed PNM header");
    long v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      if (v > 1'000'000) throw DecodeError(path.string() + ": PNM header value too large");
    }
    return v;
  };
  Decoded8 out;
  out.channels = bytes[1] == '6' ? 3 : 1;
  out.width = static_cast<int>(next_int());
  out.height = static_cast<int>(next_int());
  const long maxval = next_int();
  if (out.width < 1 || out.height < 1 || maxval < 1 || maxval > 255)
    throw DecodeError(path.string() + ": unsupported PNM dimensions or depth");
  ++pos;  // single whitespace before raster
  const std::size_t n = static_cast<std::size_t>(out.width) * out.height * out.channels;
  if (bytes.size() < pos + n) throw DecodeError(path.string() + ": truncated PNM raster");
  out.pixels.assign(bytes.begin() + pos, bytes.begin() + pos + n);
  if (maxval != 255)
    for (auto& p : out.pixels)
      p = static_cast<std::uint8_t>(std::lround(std::min<long>(p, maxval) * 255.0 / maxval));
  return out;
}

Decoded8 decode_any(const fs::path& path, bool gray) {
  const auto bytes = read_file(path);
  if (is_png(bytes)) return decode_png(path, bytes, gray);
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6'))
    return decode_pnm(path, bytes);
  throw DecodeError(path.string() + ": not a PNG or binary PPM/PGM image");
}

void resample(std::span<const float> src, int in_h, int in_w, std::span<float> dst,
              int out_h, int out_w, Resize mode) {
  if (mode == Resize::kNearest) {
    for (int y = 0; y < out_h; ++y) {
      const int sy = std::clamp(
          static_cast<int>(std::floor((y + 0.5) * in_h / static_cast<double>(out_h))), 0,
          in_h - 1);
      for (int x = 0; x < out_w; ++x) {
        const int sx = std::clamp(
            static_cast<int>(std::floor((x + 0.5) * in_w / static_cast<double>(out_w))), 0,
            in_w - 1);
        dst[static_cast<std::size_t>(y) * out_w + x] =
            src[static_cast<std::size_t>(sy) * in_w + sx];
      }
    }
    return;
  }
  for (int y = 0; y < out_h; ++y) {
    const double fy = std::clamp(source_coord(y, out_h, in_h), 0.0, in_h - 1.0);
    const int y0 = static_cast<int>(std::floor(fy));
    const int y1 = std::min(y0 + 1, in_h - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      const double fx = std::clamp(source_coord(x, out_w, in_w), 0.0, in_w - 1.0);
      const int x0 = static_cast<int>(std::floor(fx));
      const int x1 = std::min(x0 + 1, in_w - 1);
      const double wx = fx - x0;
      auto at = [&](int yy, int xx) {
        return static_cast<double>(src[static_cast<std::size_t>(yy) * in_w + xx]);
      };
      const double top = at(y0, x0) * (1 - wx) + at(y0, x1) * wx;
      const double bottom = at(y1, x0) * (1 - wx) + at(y1, x1) * wx;
      dst[static_cast<std::size_t>(y) * out_w + x] =
          static_cast<float>(top * (1 - wy) + bottom * wy);
    }
  }
}

}  // namespace

Tensor resize_image(const Tensor& image, ImageSize size, Resize mode) {
  if (image.ndim() != 3) throw ArgumentError("resize_image expects a CxHxW tensor");
  if (size.height < 1 || size.width < 1) throw ArgumentError("resize target must be >= 1");
  const auto c = image.shape()[0];
  const int in_h = static_cast<int>(image.shape()[1]);
  const int in_w = static_cast<int>(image.shape()[2]);
  const std::size_t in_plane = static_cast<std::size_t>(in_h) * in_w;
  const std::size_t out_plane = static_cast<std::size_t>(size.height) * size.width;
  std::vector<float> out(c * out_plane);
  const auto src = image.floats();
  for (std::size_t ch = 0; ch < c; ++ch)
    resample(src.subspan(ch * in_plane, in_plane), in_h, in_w,
             std::span(out).subspan(ch * out_plane, out_plane), size.height, size.width,
             mode);
  return Tensor({c, static_cast<std::size_t>(size.height),
                 static_cast<std::size_t>(size.width)},
                std::move(out));
}

Plane resize_plane(const Plane& plane, ImageSize size, Resize mode) {
  Plane out(size.height, size.width);
  resample(plane.data, plane.height, plane.width, out.data, size.height, size.width, mode);
  return out;
}

Tensor load_image(const fs::path& path, std::optional<ImageSize> size, Resize mode) {
  const Decoded8 img = decode_any(path, false);
  const std::size_t plane = static_cast<std::size_t>(img.width) * img.height;
  std::vector<float> values(3 * plane);
  for (std::size_t i = 0; i < plane; ++i)
    for (std::size_t c = 0; c < 3; ++c) {
      const std::size_t src_c = img.channels == 3 ? c : 0;
      values[c * plane + i] = img.pixels[i * img.channels + src_c] / 255.0f;
    }
  Tensor t({3, static_cast<std::size_t>(img.height), static_cast<std::size_t>(img.width)},
           std::move(values));
  if (size && (size->height != img.height || size->width != img.width))
    return resize_image(t, *size, mode);
  return t;
}

Mask load_mask(const fs::path& path, std::optional<ImageSize> size) {
  const Decoded8 img = decode_any(path, true);
  Mask mask(img.height, img.width);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    bool on = false;
    for (int c = 0; c < img.channels; ++c) on |= img.pixels[i * img.channels + c] > 0;
    mask.data[i] = on ? 1 : 0;
  }
  if (!size || (size->height == mask.height && size->width == mask.width)) return mask;
  Mask out(size->height, size->width);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) {
      const int sy = std::min(mask.height - 1, (2 * y + 1) * mask.height / (2 * out.height));
      const int sx = std::min(mask.width - 1, (2 * x + 1) * mask.width / (2 * out.width));
      out(y, x) = mask(sy, sx);
    }
  return out;
}

namespace {

void write_png_raw(const fs::path& path, int width, int height, bool rgb,
                   const std::vector<std::uint8_t>& pixels) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = rgb ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, pixels.data(), 0, nullptr))
    throw IoError(path, std::string("PNG write failed: ") + image.message);
}

std::uint8_t to_byte(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

}  // namespace

void write_png(const fs::path& path, const Tensor& rgb) {
  if (rgb.ndim() != 3 || rgb.shape()[0] != 3)
    throw ArgumentError("write_png expects a 3xHxW tensor");
  const int h = static_cast<int>(rgb.shape()[1]);
  const int w = static_cast<int>(rgb.shape()[2]);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  const auto src = rgb.floats();
  std::vector<std::uint8_t> px(3 * plane);
  for (std::size_t i = 0; i < plane; ++i)
    for (std::size_t c = 0; c < 3; ++c) px[3 * i + c] = to_byte(src[c * plane + i]);
  write_png_raw(path, w, h, true, px);
}

void write_png(const fs::path& path, const Grid<std::uint8_t>& gray) {
  write_png_raw(path, gray.width, gray.height, false, gray.data);
}

void write_pgm(const fs::path& path, const Plane& plane) {
  const auto [lo, hi] = std::minmax_element(plane.data.begin(), plane.data.end());
  const float range = plane.data.empty() ? 0.0f : *hi - *lo;
  std::string header =
      "P5\n" + std::to_string(plane.width) + " " + std::to_string(plane.height) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  for (float v : plane.data)
    bytes.push_back(range > 0 ? to_byte((v - *lo) / range) : std::uint8_t{0});
  write_file(path, bytes);
}

// ---------------------------------------------------------------------------
// Dataset

DatasetIndex load_dataset(const fs::path& root, const std::string& class_name,
                          Layout layout) {
  (void)layout;  // only the MVTec layout exists
  const fs::path class_dir = root / class_name;
  const fs::path test_dir = class_dir / "test";
  if (!fs::is_directory(test_dir))
    throw IndexError("class '" + class_name + "' has no test directory at " +
                     test_dir.string());

  std::vector<std::string> defects;
  for (const auto& entry : fs::directory_iterator(test_dir))
    if (entry.is_directory()) defects.push_back(entry.path().filename().string());
  std::sort(defects.begin(), defects.end());

  DatasetIndex index{class_name, {}};
  for (const auto& defect : defects) {
    std::vector<fs::path> images;
    for (const auto& entry : fs::directory_iterator(test_dir / defect)) {
      if (!entry.is_regular_file()) continue;
      const auto ext = entry.path().extension().string();
      if (ext == ".png" || ext == ".ppm" || ext == ".pgm") images.push_back(entry.path());
    }
    std::sort(images.begin(), images.end(), [](const fs::path& a, const fs::path& b) {
      return a.filename().string() < b.filename().string();
    });
    for (const auto& image : images) {
      DatasetSample sample{image, std::nullopt, defect != "good", defect};
      if (sample.is_anomalous) {
        const fs::path mask = class_dir / "ground_truth" / defect /
                              (image.stem().string() + "_mask.png");
        if (!fs::is_regular_file(mask))
          throw IndexError("missing mask for " + image.string() + " (expected " +
                           mask.string() + ")");
        sample.mask_path = mask;
      }
      index.samples.push_back(std::move(sample));
    }
  }
  return index;
}

}  // namespace qfca
