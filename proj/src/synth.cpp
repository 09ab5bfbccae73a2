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
#include "qfca/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "qfca/error.hpp"
#include "qfca/filters.hpp"

namespace qfca {

namespace fs = std::filesystem;

namespace {

using Rgb = std::array<double, 3>;
using Planes = std::array<Plane, 3>;

// Zero-mean, unit-variance Gaussian noise blurred with `sigma` (periodic).
Plane smooth_noise(int size, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Plane p(size, size);
  for (auto& v : p.data) v = static_cast<float>(normal(rng));
  if (sigma > 0) {
    const Kernel1D g = gaussian_kernel(sigma);
    p = separable_filter(p, g, g, Pad::kWrap);
  }
  double mean = 0, sq = 0;
  for (float v : p.data) mean += v;
  mean /= p.size();
  for (float v : p.data) sq += (v - mean) * (v - mean);
  const double sd = std::sqrt(sq / p.size());
  for (auto& v : p.data) v = static_cast<float>((v - mean) / (sd > 0 ? sd : 1.0));
  return p;
}

Planes noise_texture(int size, double sigma, Rgb color, double amp, std::mt19937_64& rng) {
  const Plane shared = smooth_noise(size, sigma, rng);
  Planes out;
  for (int c = 0; c < 3; ++c) {
    const Plane own = smooth_noise(size, sigma, rng);
    out[c] = Plane(size, size);
    for (std::size_t i = 0; i < shared.size(); ++i)
      out[c].data[i] =
          static_cast<float>(color[c] + amp * (shared.data[i] + 0.3 * own.data[i]));
  }
  return out;
}

Planes stripe_texture(int size, double period, double theta, Rgb color, double amp,
                      std::mt19937_64& rng) {
  std::uniform_real_distribution<double> phase_dist(0.0, 2 * std::numbers::pi);
  const double phase = phase_dist(rng);
  const Plane grain = smooth_noise(size, 1.0, rng);
  const double cs = std::cos(theta), sn = std::sin(theta);
  Planes out;
  for (int c = 0; c < 3; ++c) out[c] = Plane(size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double wave =
          std::sin(2 * std::numbers::pi * (x * cs + y * sn) / period + phase);
      for (int c = 0; c < 3; ++c)
        out[c](y, x) =
            static_cast<float>(color[c] + amp * wave + 0.15 * amp * grain(y, x));
    }
  return out;
}

Planes base_texture(TextureKind kind, int size, std::mt19937_64& rng) {
  switch (kind) {
    case TextureKind::kNoise:
      return noise_texture(size, 2.0, {0.55, 0.50, 0.45}, 0.12, rng);
    case TextureKind::kStripes:
      return stripe_texture(size, 12.0, std::numbers::pi / 6, {0.40, 0.50, 0.60}, 0.25, rng);
    case TextureKind::kTiles: {
      // checkerboard of two unrelated textures, tiles much larger than a patch
      const Planes a = noise_texture(size, 1.5, {0.46, 0.43, 0.46}, 0.10, rng);
      const Planes b = stripe_texture(size, 8.0, 0.0, {0.56, 0.47, 0.36}, 0.10, rng);
      const int tile = std::max(8, size / 4);
      Planes out = a;
      for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
          if ((y / tile + x / tile) % 2)
            for (int c = 0; c < 3; ++c) out[c](y, x) = b[c](y, x);
      return out;
    }
  }
  throw ArgumentError("unknown texture kind");
}

Mask region_mask(const SynthConfig& cfg, std::mt19937_64& rng) {
  const int s = cfg.size;
  const double area = cfg.anomaly_frac * s * s;
  Mask m(s, s, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (cfg.anomaly == AnomalyKind::kSquare) {
    const int side = std::clamp(static_cast<int>(std::lround(std::sqrt(area))), 1, s / 2);
    const int lo = s / 8, span = std::max(1, s - 2 * (s / 8) - side);
    const int y0 = lo + static_cast<int>(unit(rng) * span);
    const int x0 = lo + static_cast<int>(unit(rng) * span);
    for (int y = y0; y < y0 + side; ++y)
      for (int x = x0; x < x0 + side; ++x) m(y, x) = 1;
    return m;
  }
  // star-shaped blob r(a) = r0 (1 + w sin(3a + phi)); area = pi r0^2 (1 + w^2 / 2)
  const double wobble = 0.25;
  const double r0 = std::sqrt(area / (std::numbers::pi * (1 + wobble * wobble / 2)));
  const double phi = unit(rng) * 2 * std::numbers::pi;
  const double reach = r0 * (1 + wobble);
  const double lo = s / 8.0 + reach, span = std::max(0.0, s - 2 * lo);
  const double cy = lo + unit(rng) * span, cx = lo + unit(rng) * span;
  for (int y = 0; y < s; ++y)
    for (int x = 0; x < s; ++x) {
      const double dy = y + 0.5 - cy, dx = x + 0.5 - cx;
      const double r = std::hypot(dx, dy);
      if (r <= r0 * (1 + wobble * std::sin(3 * std::atan2(dy, dx) + phi))) m(y, x) = 1;
    }
  return m;
}

void plant(Planes& img, const Mask& mask, AnomalyFill fill, int size, std::mt19937_64& rng) {
  if (fill == AnomalyFill::kContrast) {
    const Rgb shift{0.18, -0.05, -0.15};
    for (std::size_t i = 0; i < mask.size(); ++i)
      if (mask.data[i])
        for (int c = 0; c < 3; ++c) img[c].data[i] += static_cast<float>(shift[c]);
    return;
  }
  const Planes foreign = noise_texture(size, 5.0, {0.60, 0.40, 0.50}, 0.15, rng);
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask.data[i])
      for (int c = 0; c < 3; ++c) img[c].data[i] = foreign[c].data[i];
}

}  // namespace

TextureKind parse_texture_kind(std::string_view name) {
  if (name == "tiles") return TextureKind::kTiles;
  if (name == "noise") return TextureKind::kNoise;
  if (name == "stripes") return TextureKind::kStripes;
  throw ArgumentError("unknown texture kind '" + std::string(name) +
                      "' (expected tiles, noise or stripes)");
}

AnomalyKind parse_anomaly_kind(std::string_view name) {
  if (name == "square") return AnomalyKind::kSquare;
  if (name == "blob") return AnomalyKind::kBlob;
  throw ArgumentError("unknown anomaly kind '" + std::string(name) +
                      "' (expected square or blob)");
}

std::string_view to_string(TextureKind kind) {
  switch (kind) {
    case TextureKind::kTiles: return "tiles";
    case TextureKind::kNoise: return "noise";
    case TextureKind::kStripes: return "stripes";
  }
  return "?";
}

std::string_view to_string(AnomalyKind kind) {
  return kind == AnomalyKind::kSquare ? "square" : "blob";
}

std::string_view to_string(AnomalyFill fill) {
  return fill == AnomalyFill::kContrast ? "contrast" : "swap";
}

SynthImage synth_image(const SynthConfig& cfg, int index, bool anomalous) {
  if (cfg.size < 16) throw ArgumentError("synthetic images need size >= 16");
  if (!(cfg.anomaly_frac > 0 && cfg.anomaly_frac < 0.25))
    throw ArgumentError("anomaly fraction must be in (0, 0.25)");
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed),
                    static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(cfg.kind), static_cast<std::uint32_t>(index)};
  std::mt19937_64 rng(seq);
  Planes img = base_texture(cfg.kind, cfg.size, rng);
  SynthImage out;
  out.mask = Mask(cfg.size, cfg.size, 0);
  if (anomalous) {
    out.fill = index % 2 == 0 ? AnomalyFill::kContrast : AnomalyFill::kSwap;
    out.mask = region_mask(cfg, rng);
    plant(img, out.mask, out.fill, cfg.size, rng);
  }
  const std::size_t plane = static_cast<std::size_t>(cfg.size) * cfg.size;
  std::vector<float> values(3 * plane);
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < plane; ++i)
      values[c * plane + i] = std::clamp(img[c].data[i], 0.0f, 1.0f);
  const auto s = static_cast<std::size_t>(cfg.size);
  out.rgb = Tensor({3, s, s}, std::move(values));
  return out;
}

void write_synth_dataset(const SynthConfig& cfg, const fs::path& root,
                         std::string class_name) {
  if (cfg.count < 1 || cfg.good < 0 || cfg.good > cfg.count)
    throw ArgumentError("need count >= 1 and 0 <= good <= count");
  if (class_name.empty()) class_name = std::string(to_string(cfg.kind));
  const fs::path dir = root / class_name;
  const int n_anomalous = cfg.count - cfg.good;
  for (int i = 0; i < cfg.count; ++i) {
    const bool anomalous = i < n_anomalous;
    const SynthImage img = synth_image(cfg, i, anomalous);
    char stem[16];
    std::snprintf(stem, sizeof stem, "%03d", i);
    const std::string defect = anomalous ? std::string(to_string(img.fill)) : "good";
    fs::create_directories(dir / "test" / defect);
    write_png(dir / "test" / defect / (std::string(stem) + ".png"), img.rgb);
    if (anomalous) {
      fs::create_directories(dir / "ground_truth" / defect);
      Grid<std::uint8_t> gray(cfg.size, cfg.size, 0);
      for (std::size_t k = 0; k < gray.size(); ++k) gray.data[k] = img.mask.data[k] ? 255 : 0;
      write_png(dir / "ground_truth" / defect / (std::string(stem) + "_mask.png"), gray);
    }
  }
}

}  // namespace qfca
