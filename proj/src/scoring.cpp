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
#include "qfca/scoring.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "qfca/error.hpp"
#include "qfca/filters.hpp"
#include "qfca/parallel.hpp"
#include "qfca/pooling.hpp"
#include "qfca/transport.hpp"

namespace qfca {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

// Transport of every location of one channel. `hist` holds N planes of
// `plane` values; errors go to `out` (same layout, distinct buffer).
void channel_errors(const float* hist, std::size_t plane, int n_bins,
                    std::span<const double> ref_weights, std::span<const double> centers,
                    float* out) {
  const SparseReference ref = make_sparse_reference(ref_weights);
  for (std::size_t i = 0; i < plane; ++i) {
    double mass = 0.0;
    for (int b = 0; b < n_bins; ++b) mass += hist[b * plane + i];
    if (std::abs(mass - ref.mass) <= 1e-6 * ref.mass) {
      sparse_mismatch(hist + i, plane, n_bins, ref, centers, out + i);
    } else {
      // truncated windows (zero padding): match the reference to the patch mass
      const SparseReference scaled =
          make_sparse_reference(ref_weights, ref.mass > 0 ? mass / ref.mass : 0.0);
      sparse_mismatch(hist + i, plane, n_bins, scaled, centers, out + i);
    }
  }
}

int source(int e, int n, Pad pad);

// Same result as channel_errors for full-mass windows when N exceeds the
// window size: the non-empty bins of a patch are read off the bin map
// instead of scanning all N planes.
void channel_errors_windowed(const float* hist, std::span<const std::uint16_t> bin_map,
                             int height, int width, int n_bins, int patch_size, Pad pad,
                             std::span<const double> ref_weights,
                             std::span<const double> centers, float* out) {
  const std::size_t plane = static_cast<std::size_t>(height) * width;
  const int half = patch_size / 2;
  const SparseReference ref = make_sparse_reference(ref_weights);
  std::vector<int> rows(height + 2 * half), cols(width + 2 * half);
  for (int e = -half; e < height + half; ++e) rows[e + half] = source(e, height, pad);
  for (int e = -half; e < width + half; ++e) cols[e + half] = source(e, width, pad);
  std::vector<std::size_t> stamp(n_bins, plane);
  std::vector<int> bins;
  std::vector<float> counts, errs;
  std::fill_n(out, plane * n_bins, 0.0f);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * width + x;
      bins.clear();
      for (int dy = 0; dy < patch_size; ++dy) {
        const int sy = rows[y + dy];
        const std::uint16_t* row = bin_map.data() + static_cast<std::size_t>(sy) * width;
        for (int dx = 0; dx < patch_size; ++dx) {
          const int b = row[cols[x + dx]];
          if (stamp[b] != i) {
            stamp[b] = i;
            bins.push_back(b);
          }
        }
      }
      std::sort(bins.begin(), bins.end());
      counts.resize(bins.size());
      errs.resize(bins.size());
      for (std::size_t k = 0; k < bins.size(); ++k) counts[k] = hist[bins[k] * plane + i];
      sparse_mismatch_list(bins.data(), counts.data(), static_cast<int>(bins.size()), ref,
                           centers, errs.data());
      for (std::size_t k = 0; k < bins.size(); ++k) out[bins[k] * plane + i] = errs[k];
    }
}

// Padded source index of extended coordinate e, or -1 (zero padding).
int source(int e, int n, Pad pad) {
  if (pad == Pad::kReflect) return reflect_index(e, n);
  if (pad == Pad::kWrap) return wrap_index(e, n);
  return e >= 0 && e < n ? e : -1;
}

// Window weighting of all N error planes of one channel, read back at each
// pixel's own bin. Bins with few pixels are weighted directly at those
// pixels; the others go through a whole-plane filter.
void channel_association(const float* errors, std::span<const std::uint16_t> bins,
                         int height, int width, int n_bins, const PipelineConfig& config,
                         BoxFilter& filter, std::vector<float>& scratch, float* out) {
  const std::size_t plane = static_cast<std::size_t>(height) * width;
  const int t = config.patch_size, half = t / 2;
  std::vector<std::size_t> count(n_bins, 0);
  for (auto b : bins) ++count[b];
  scratch.resize(plane);
  const bool box = std::isinf(config.sigma_p);
  std::vector<double> taps(t, 1.0 / t);  // per-axis weights at offsets -half..half
  Kernel1D kernel;
  if (!box) {
    kernel = gaussian_kernel(config.sigma_p, half);
    for (int d = -half; d <= half; ++d) taps[d + half] = kernel.taps[std::abs(d)];
  }
  const double plane_cost = box ? 2.0 * (height + t) * (width + t) + double(plane)
                                : 2.0 * t * double(plane);
  std::vector<int> rows(height + 2 * half), cols(width + 2 * half);
  for (int e = -half; e < height + half; ++e) rows[e + half] = source(e, height, config.pad);
  for (int e = -half; e < width + half; ++e) cols[e + half] = source(e, width, config.pad);

  for (int b = 0; b < n_bins; ++b) {
    if (count[b] == 0) continue;
    const float* src = errors + b * plane;
    if (count[b] * double(t) * t < plane_cost) {
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
          const std::size_t i = static_cast<std::size_t>(y) * width + x;
          if (bins[i] != b) continue;
          double acc = 0.0;
          for (int dy = 0; dy < t; ++dy) {
            const int sy = rows[y + dy];
            if (sy < 0) continue;
            const float* row = src + static_cast<std::size_t>(sy) * width;
            double line = 0.0;
            for (int dx = 0; dx < t; ++dx) {
              const int sx = cols[x + dx];
              if (sx >= 0) line += taps[dx] * row[sx];
            }
            acc += taps[dy] * line;
          }
          out[i] = static_cast<float>(acc);
        }
      continue;
    }
    std::span<const float> in(src, plane);
    if (box) {
      filter.apply(in, height, width, t, config.pad, 1.0 / (double(t) * t), scratch);
    } else {
      Plane p(height, width);
      std::copy(in.begin(), in.end(), p.data.begin());
      const Plane smoothed = separable_filter(p, kernel, kernel, config.pad);
      std::copy(smoothed.data.begin(), smoothed.data.end(), scratch.begin());
    }
    for (std::size_t i = 0; i < plane; ++i)
      if (bins[i] == b) out[i] = scratch[i];
  }
}

std::vector<double> channel_reference(const FeatureMap& f, const Quantizer& q, int c,
                                      const float* hist, std::span<const Location> samples,
                                      const PipelineConfig& config) {
  const int n = q.n_bins;
  const int t = config.patch_size;
  if (config.reference == ReferenceMode::kMeanQuan) {
    std::vector<double> w(n, 0.0);
    const auto values = rank_reference_values(f.channel(c), f.height, f.width, t, samples,
                                              RankStatistic::kMean, config.pad);
    for (double v : values) w[q.bin(c, static_cast<float>(v))] += 1.0;
    return w;
  }
  // the histogram planes already hold every sampled patch's counts
  const std::size_t plane = f.plane_size();
  const std::size_t s_count = samples.size();
  std::vector<int> sampled(s_count * n);
  for (int b = 0; b < n; ++b)
    for (std::size_t s = 0; s < s_count; ++s) {
      const std::size_t at = static_cast<std::size_t>(samples[s].y) * f.width + samples[s].x;
      sampled[b * s_count + s] = static_cast<int>(std::lround(hist[b * plane + at]));
    }
  return reference_from_histograms(sampled, n, t, config.reference);
}

}  // namespace

void PipelineConfig::validate() const {
  if (n_bins < 1 || n_bins > 65536)
    throw ArgumentError("n_bins must be in [1, 65536], got " + std::to_string(n_bins));
  check_kernel_size(patch_size);
  if (!(sigma_p > 0)) throw ArgumentError("sigma_p must be > 0 (inf for a box window)");
  if (!(sigma_s >= 0) || std::isinf(sigma_s))
    throw ArgumentError("sigma_s must be finite and >= 0");
  if (pca_components < 0) throw ArgumentError("pca components must be >= 0");
  if (sample_budget < 1) throw ArgumentError("sample budget must be >= 1");
  if (pad == Pad::kZero)
    throw ArgumentError("the pipeline needs reflect or wrap padding (full-mass windows)");
}

ErrorMaps bin_error_maps(const HistogramField& hf, const ReferenceHistogram& ref,
                         const Quantizer& q) {
  if (hf.channels != ref.channels || hf.n_bins != ref.n_bins || hf.n_bins != q.n_bins ||
      q.channels() != hf.channels)
    throw ArgumentError("histogram field, reference and quantizer disagree in shape");
  ErrorMaps em{hf.channels, hf.n_bins, hf.height, hf.width,
               std::vector<float>(hf.counts.size(), 0.0f)};
  const std::size_t plane = hf.plane_size();
  const std::size_t per_channel = plane * hf.n_bins;
  parallel_for(hf.channels, [&](std::size_t, std::size_t c) {
    if (q.degenerate[c]) return;
    const auto centers = q.centers(static_cast<int>(c));
    channel_errors(hf.counts.data() + c * per_channel, plane, hf.n_bins,
                   ref.channel(static_cast<int>(c)), centers,
                   em.values.data() + c * per_channel);
  });
  return em;
}

FeatureMap associate_errors(const ErrorMaps& errors, const BinIndexMap& bins,
                            const PipelineConfig& config) {
  if (errors.channels != bins.channels || errors.height != bins.height ||
      errors.width != bins.width)
    throw ArgumentError("error maps and bin indices disagree in shape");
  FeatureMap out(errors.channels, errors.height, errors.width);
  const std::size_t plane = errors.plane_size();
  const std::size_t workers = workers_for(errors.channels);
  std::vector<BoxFilter> filters(workers);
  std::vector<std::vector<float>> scratch(workers);
  parallel_for(errors.channels, [&](std::size_t w, std::size_t c) {
    channel_association(errors.values.data() + c * plane * errors.n_bins,
                        bins.channel(static_cast<int>(c)), errors.height, errors.width,
                        errors.n_bins, config, filters[w], scratch[w],
                        out.channel(static_cast<int>(c)).data());
  });
  return out;
}

ChannelAverage aggregate_channels(const FeatureMap& scores,
                                  std::span<const std::uint8_t> degenerate) {
  if (!degenerate.empty() && degenerate.size() != static_cast<std::size_t>(scores.channels))
    throw ArgumentError("degenerate flags do not match the channel count");
  ChannelAverage avg;
  avg.map = Plane(scores.height, scores.width);
  const std::size_t plane = scores.plane_size();
  std::vector<double> sum(plane, 0.0);
  int used = 0;
  for (int c = 0; c < scores.channels; ++c) {
    if (!degenerate.empty() && degenerate[c]) continue;
    const auto ch = scores.channel(c);
    for (std::size_t i = 0; i < plane; ++i) sum[i] += ch[i];
    ++used;
  }
  avg.all_degenerate = used == 0;
  if (used > 0)
    for (std::size_t i = 0; i < plane; ++i)
      avg.map.data[i] = static_cast<float>(sum[i] / used);
  return avg;
}

Plane smooth_scores(const Plane& map, double sigma_s, Pad pad) {
  if (sigma_s == 0) return map;
  const Kernel1D g = gaussian_kernel(sigma_s);
  return separable_filter(map, g, g, pad);
}

float max_interior(const Plane& map, int border) {
  if (map.size() == 0) return 0.0f;
  int b = std::max(0, border);
  if (2 * b >= map.height || 2 * b >= map.width) b = 0;
  float best = map(b, b);
  for (int y = b; y < map.height - b; ++y)
    for (int x = b; x < map.width - b; ++x) best = std::max(best, map(y, x));
  return best;
}

AnomalyMap detect(const FeatureMap& input, const PipelineConfig& config,
                  StageTimings* timings) {
  config.validate();
  if (input.channels < 1 || input.height < 1 || input.width < 1)
    throw ArgumentError("empty feature map");
  const auto start = Clock::now();
  StageTimings local;

  auto t0 = Clock::now();
  FeatureMap residual;
  if (config.pca_components > 0)
    residual = pca_residual(input, pca_fit(input, config.pca_components));
  const FeatureMap& f = config.pca_components > 0 ? residual : input;
  local.pca_ms = elapsed_ms(t0);

  t0 = Clock::now();
  const Quantizer q = fit_quantizer(f, config.n_bins);
  const BinIndexMap bins = bin_indices(f, q);
  local.quantize_ms = elapsed_ms(t0);

  const int n = config.n_bins;
  const std::size_t plane = f.plane_size();
  const auto samples = sample_grid(f.height, f.width, config.sample_budget);
  const std::size_t workers = workers_for(f.channels);
  std::vector<std::vector<float>> buffers(workers);
  std::vector<std::vector<float>> errors(workers);
  std::vector<std::vector<float>> scratch(workers);
  std::vector<BoxFilter> filters(workers);
  std::vector<StageTimings> stage(workers);
  FeatureMap channel_scores(f.channels, f.height, f.width);

  // One channel at a time per worker keeps the working set at 2N planes.
  parallel_for(f.channels, [&](std::size_t w, std::size_t cu) {
    const int c = static_cast<int>(cu);
    if (q.degenerate[c]) return;
    auto& buf = buffers[w];
    buf.resize(static_cast<std::size_t>(n) * plane);
    auto t = Clock::now();
    channel_histograms(bins, c, n, config.patch_size, config.pad, filters[w], scratch[w],
                       buf);
    stage[w].histogram_ms += elapsed_ms(t);

    t = Clock::now();
    const auto ref = channel_reference(f, q, c, buf.data(), samples, config);
    stage[w].reference_ms += elapsed_ms(t);

    t = Clock::now();
    const auto centers = q.centers(c);
    auto& err = errors[w];
    err.resize(buf.size());
    if (n > config.patch_size * config.patch_size) {
      channel_errors_windowed(buf.data(), bins.channel(c), f.height, f.width, n,
                              config.patch_size, config.pad, ref, centers, err.data());
    } else {
      channel_errors(buf.data(), plane, n, ref, centers, err.data());
    }
    stage[w].transport_ms += elapsed_ms(t);

    t = Clock::now();
    channel_association(err.data(), bins.channel(c), f.height, f.width, n, config,
                        filters[w], scratch[w], channel_scores.channel(c).data());
    stage[w].associate_ms += elapsed_ms(t);
  });
  for (const auto& s : stage) {
    local.histogram_ms += s.histogram_ms;
    local.reference_ms += s.reference_ms;
    local.transport_ms += s.transport_ms;
    local.associate_ms += s.associate_ms;
  }

  t0 = Clock::now();
  ChannelAverage avg = aggregate_channels(channel_scores, q.degenerate);
  local.aggregate_ms = elapsed_ms(t0);

  t0 = Clock::now();
  AnomalyMap out;
  out.scores = smooth_scores(avg.map, config.sigma_s, config.pad);
  out.image_score = max_interior(out.scores, config.border());
  out.scale = input.scale;
  out.all_degenerate = avg.all_degenerate;
  local.smooth_ms = elapsed_ms(t0);

  local.total_ms = elapsed_ms(start);
  if (timings) *timings = local;
  return out;
}

Plane upsample_scores(const AnomalyMap& map, ImageSize size) {
  return resize_plane(map.scores, size, Resize::kBilinear);
}

}  // namespace qfca
