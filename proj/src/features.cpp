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
#include "qfca/features.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "qfca/error.hpp"
#include "qfca/filters.hpp"
#include "qfca/parallel.hpp"

namespace qfca {

namespace fs = std::filesystem;

Plane FeatureMap::channel_plane(int c) const {
  Plane p(height, width);
  const auto src = channel(c);
  std::copy(src.begin(), src.end(), p.data.begin());
  return p;
}

int filterbank_channels(const FilterBankConfig& config) {
  const int per_sigma = config.laplacian ? 4 : 3;
  return 3 * (1 + per_sigma * static_cast<int>(config.sigmas.size()));
}

namespace {

// Block average by `scale`; trailing rows/columns that do not fill a block
// are dropped.
void downsample_into(const Plane& in, int scale, std::span<float> out) {
  const int oh = in.height / scale;
  const int ow = in.width / scale;
  const double norm = 1.0 / (double(scale) * scale);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int dy = 0; dy < scale; ++dy)
        for (int dx = 0; dx < scale; ++dx) acc += in(y * scale + dy, x * scale + dx);
      out[static_cast<std::size_t>(y) * ow + x] = static_cast<float>(acc * norm);
    }
}

}  // namespace

FeatureMap extract_filterbank(const Tensor& image, const FilterBankConfig& config) {
  if (image.ndim() != 3 || image.shape()[0] != 3)
    throw ArgumentError("extract_filterbank expects a 3xHxW image");
  if (config.scale < 1) throw ArgumentError("filter bank scale must be >= 1");
  const int h = static_cast<int>(image.shape()[1]);
  const int w = static_cast<int>(image.shape()[2]);
  if (h < config.scale || w < config.scale)
    throw ArgumentError("image smaller than the downsampling factor");

  const int per_color = filterbank_channels(config) / 3;
  FeatureMap f(3 * per_color, h / config.scale, w / config.scale, config.scale);
  const auto pixels = image.floats();
  const std::size_t plane = static_cast<std::size_t>(h) * w;

  struct Job {
    int color;
    int sigma_index;  // -1 = identity
  };
  std::vector<Job> jobs;
  for (int c = 0; c < 3; ++c) {
    jobs.push_back({c, -1});
    for (int s = 0; s < static_cast<int>(config.sigmas.size()); ++s) jobs.push_back({c, s});
  }

  const int n_sigma = static_cast<int>(config.sigmas.size());
  parallel_for(jobs.size(), [&](std::size_t, std::size_t j) {
    const Job job = jobs[j];
    Plane src(h, w);
    std::copy_n(pixels.begin() + job.color * plane, plane, src.data.begin());
    const int base = job.color * per_color;
    auto emit = [&](int channel, const Plane& p) {
      downsample_into(p, config.scale, f.channel(channel));
    };
    if (job.sigma_index < 0) {
      emit(base, src);
      return;
    }
    const double sigma = config.sigmas[job.sigma_index];
    const Kernel1D g = gaussian_kernel(sigma);
    const Kernel1D d = gaussian_derivative_kernel(sigma);
    emit(base + 1 + job.sigma_index, separable_filter(src, g, g, Pad::kReflect));
    emit(base + 1 + n_sigma + 2 * job.sigma_index,
         separable_filter(src, d, g, Pad::kReflect));
    emit(base + 2 + n_sigma + 2 * job.sigma_index,
         separable_filter(src, g, d, Pad::kReflect));
    if (config.laplacian) {
      const Kernel1D dd = gaussian_second_derivative_kernel(sigma);
      Plane lap = separable_filter(src, dd, g, Pad::kReflect);
      const Plane yy = separable_filter(src, g, dd, Pad::kReflect);
      for (std::size_t i = 0; i < lap.size(); ++i) lap.data[i] += yy.data[i];
      emit(base + 1 + 3 * n_sigma + job.sigma_index, lap);
    }
  });
  return f;
}

FeatureMap feature_map_from_tensor(const Tensor& t, int scale) {
  if (t.dtype() != DType::kFloat32 || t.ndim() != 3)
    throw FormatError(FormatError::Kind::kShape,
                      "feature tensor must be float32 with shape [C, H, W]");
  if (scale < 1) throw ArgumentError("feature scale must be >= 1");
  FeatureMap f(static_cast<int>(t.shape()[0]), static_cast<int>(t.shape()[1]),
               static_cast<int>(t.shape()[2]), scale);
  const auto src = t.floats();
  std::copy(src.begin(), src.end(), f.values.begin());
  for (float v : f.values)
    if (!std::isfinite(v)) throw FormatError(FormatError::Kind::kShape, "non-finite feature value");
  return f;
}

Tensor to_tensor(const FeatureMap& f) {
  return Tensor({static_cast<std::size_t>(f.channels), static_cast<std::size_t>(f.height),
                 static_cast<std::size_t>(f.width)},
                f.values);
}

FeatureMap load_external_features(const fs::path& path) {
  const Tensor t = read_tensor(path);
  int scale = 8;
  for (const fs::path& sidecar :
       {fs::path(path.string() + ".json"), fs::path(path).replace_extension(".json")}) {
    if (sidecar == path || !fs::is_regular_file(sidecar)) continue;
    std::ifstream in(sidecar);
    const auto doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.contains("scale") || !doc["scale"].is_number_integer())
      throw FormatError(FormatError::Kind::kShape,
                        sidecar.string() + ": expected {\"scale\": int}");
    scale = doc["scale"].get<int>();
    break;
  }
  return feature_map_from_tensor(t, scale);
}

// ---------------------------------------------------------------------------
// PCA

namespace {

using MatrixRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr std::size_t kCovBlock = 4096;

// Fixed-size pixel blocks reduced in block order, so the result does not
// depend on the worker count.
Eigen::VectorXd channel_means(const FeatureMap& f) {
  const std::size_t n = f.plane_size();
  const std::size_t blocks = (n + kCovBlock - 1) / kCovBlock;
  std::vector<Eigen::VectorXd> partial(blocks, Eigen::VectorXd::Zero(f.channels));
  parallel_for(blocks, [&](std::size_t, std::size_t b) {
    const std::size_t lo = b * kCovBlock, hi = std::min(n, lo + kCovBlock);
    for (int c = 0; c < f.channels; ++c) {
      const auto ch = f.channel(c);
      double s = 0.0;
      for (std::size_t i = lo; i < hi; ++i) s += ch[i];
      partial[b][c] = s;
    }
  });
  Eigen::VectorXd total = Eigen::VectorXd::Zero(f.channels);
  for (const auto& p : partial) total += p;
  return total / static_cast<double>(n);
}

// Centred block of pixels as a C x B matrix.
Eigen::MatrixXd centred_block(const FeatureMap& f, const Eigen::VectorXd& mean,
                              std::size_t lo, std::size_t hi) {
  Eigen::MatrixXd x(f.channels, static_cast<Eigen::Index>(hi - lo));
  for (int c = 0; c < f.channels; ++c) {
    const auto ch = f.channel(c);
    for (std::size_t i = lo; i < hi; ++i)
      x(c, static_cast<Eigen::Index>(i - lo)) = ch[i] - mean[c];
  }
  return x;
}

}  // namespace

PcaModel pca_fit(const FeatureMap& f, int k) {
  if (k < 1 || k > f.channels)
    throw ArgumentError("PCA component count must be in [1, " + std::to_string(f.channels) +
                        "], got " + std::to_string(k));
  const int c = f.channels;
  const std::size_t n = f.plane_size();
  const Eigen::VectorXd mean = channel_means(f);

  const std::size_t blocks = (n + kCovBlock - 1) / kCovBlock;
  std::vector<Eigen::MatrixXd> partial(blocks);
  parallel_for(blocks, [&](std::size_t, std::size_t b) {
    const std::size_t lo = b * kCovBlock, hi = std::min(n, lo + kCovBlock);
    const Eigen::MatrixXd x = centred_block(f, mean, lo, hi);
    partial[b] = x * x.transpose();
  });
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(c, c);
  for (const auto& p : partial) cov += p;
  cov /= static_cast<double>(n);
  cov = 0.5 * (cov + cov.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw Error("PCA eigendecomposition failed");

  PcaModel model;
  model.dims = c;
  model.mean.assign(mean.data(), mean.data() + c);
  model.components.resize(static_cast<std::size_t>(k) * c);
  model.eigenvalues.resize(k);
  // Eigen sorts ascending; walk from the top.
  for (int r = 0; r < k; ++r) {
    const int src = c - 1 - r;
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0) v = -v;
    std::copy(v.data(), v.data() + c, model.components.begin() + r * c);
    model.eigenvalues[r] = solver.eigenvalues()[src];
  }
  return model;
}

FeatureMap pca_residual(const FeatureMap& f, const PcaModel& model) {
  if (model.dims != f.channels)
    throw ArgumentError("PCA model has " + std::to_string(model.dims) +
                        " dims but features have " + std::to_string(f.channels) +
                        " channels");
  const int c = f.channels;
  const int k = model.rank();
  const std::size_t n = f.plane_size();
  const Eigen::Map<const Eigen::VectorXd> mean(model.mean.data(), c);
  const Eigen::Map<const MatrixRM> v(model.components.data(), k, c);

  FeatureMap out(c, f.height, f.width, f.scale);
  const std::size_t blocks = (n + kCovBlock - 1) / kCovBlock;
  parallel_for(blocks, [&](std::size_t, std::size_t b) {
    const std::size_t lo = b * kCovBlock, hi = std::min(n, lo + kCovBlock);
    const Eigen::MatrixXd x = centred_block(f, mean, lo, hi);
    const Eigen::MatrixXd r = x - v.transpose() * (v * x);
    for (int ch = 0; ch < c; ++ch) {
      auto dst = out.channel(ch);
      for (std::size_t i = lo; i < hi; ++i)
        dst[i] = static_cast<float>(r(ch, static_cast<Eigen::Index>(i - lo)));
    }
  });
  return out;
}

}  // namespace qfca
