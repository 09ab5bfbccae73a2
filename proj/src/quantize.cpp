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
#include "qfca/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "qfca/error.hpp"
#include "qfca/parallel.hpp"

namespace qfca {

ReferenceMode parse_reference_mode(std::string_view name) {
  if (name == "median-quan") return ReferenceMode::kMedianQuan;
  if (name == "mean-quan") return ReferenceMode::kMeanQuan;
  if (name == "quan-median") return ReferenceMode::kQuanMedian;
  if (name == "quan-mean") return ReferenceMode::kQuanMean;
  throw ArgumentError("unknown reference mode '" + std::string(name) +
                      "' (expected median-quan, mean-quan, quan-median or quan-mean)");
}

std::string_view to_string(ReferenceMode mode) {
  switch (mode) {
    case ReferenceMode::kMedianQuan:
      return "median-quan";
    case ReferenceMode::kMeanQuan:
      return "mean-quan";
    case ReferenceMode::kQuanMedian:
      return "quan-median";
    case ReferenceMode::kQuanMean:
      return "quan-mean";
  }
  return "?";
}

std::vector<double> Quantizer::centers(int channel) const {
  std::vector<double> q(n_bins);
  const double l = lo[channel], h = hi[channel];
  for (int i = 0; i < n_bins; ++i) q[i] = l + (i + 0.5) * (h - l) / n_bins;
  return q;
}

int Quantizer::bin(int channel, float value) const noexcept {
  if (degenerate[channel]) return 0;
  const double l = lo[channel], h = hi[channel];
  const double pos = std::floor((value - l) * n_bins / (h - l));
  if (!(pos > 0)) return 0;  // also catches NaN
  return pos >= n_bins ? n_bins - 1 : static_cast<int>(pos);
}

Quantizer fit_quantizer(const FeatureMap& f, int n_bins) {
  if (n_bins < 1 || n_bins > std::numeric_limits<std::uint16_t>::max() + 1)
    throw ArgumentError("bin count must be in [1, 65536], got " + std::to_string(n_bins));
  Quantizer q;
  q.n_bins = n_bins;
  q.lo.resize(f.channels);
  q.hi.resize(f.channels);
  q.degenerate.resize(f.channels);
  for (int c = 0; c < f.channels; ++c) {
    const auto ch = f.channel(c);
    const auto [lo, hi] = std::minmax_element(ch.begin(), ch.end());
    q.lo[c] = *lo;
    q.hi[c] = *hi;
    q.degenerate[c] = *lo == *hi;
  }
  return q;
}

BinIndexMap bin_indices(const FeatureMap& f, const Quantizer& q) {
  if (q.channels() != f.channels)
    throw ArgumentError("quantizer fitted on a different channel count");
  BinIndexMap map{f.channels, f.height, f.width, q.n_bins,
                  std::vector<std::uint16_t>(f.values.size())};
  const std::size_t plane = f.plane_size();
  parallel_for(f.channels, [&](std::size_t, std::size_t c) {
    const auto src = f.channel(static_cast<int>(c));
    std::uint16_t* dst = map.bins.data() + c * plane;
    for (std::size_t i = 0; i < plane; ++i)
      dst[i] = static_cast<std::uint16_t>(q.bin(static_cast<int>(c), src[i]));
  });
  return map;
}

namespace {

// Extended coordinates e in [-half, n - 1 + half] whose padded source is i.
std::vector<std::vector<int>> preimages(int n, int half, Pad pad) {
  std::vector<std::vector<int>> pre(n);
  for (int e = -half; e <= n - 1 + half; ++e) {
    int i = e;
    if (pad == Pad::kReflect) i = reflect_index(e, n);
    else if (pad == Pad::kWrap) i = wrap_index(e, n);
    else if (e < 0 || e >= n) continue;
    pre[i].push_back(e);
  }
  return pre;
}

}  // namespace

void channel_histograms(const BinIndexMap& bins, int channel, int n_bins, int patch_size,
                        Pad pad, BoxFilter& filter, std::vector<float>& indicator,
                        std::span<float> out) {
  const std::size_t plane = bins.plane_size();
  const int h = bins.height, w = bins.width, half = patch_size / 2;
  const auto src = bins.channel(channel);
  indicator.resize(plane);
  std::vector<std::size_t> count(n_bins, 0);
  for (std::size_t i = 0; i < plane; ++i) ++count[src[i]];
  // A bin with few pixels is cheaper to scatter into its windows than to
  // run through a summed-area table; both give the same integer counts.
  const double table_cost = 2.0 * (h + 2 * half) * (w + 2 * half) + double(plane);
  const double window = double(patch_size) * patch_size;
  std::vector<std::vector<int>> pre_y, pre_x;
  for (int b = 0; b < n_bins; ++b) {
    float* dst = out.data() + b * plane;
    if (count[b] == 0) {
      std::fill_n(dst, plane, 0.0f);
      continue;
    }
    if (count[b] * window < table_cost) {
      if (pre_y.empty()) {
        pre_y = preimages(h, half, pad);
        pre_x = preimages(w, half, pad);
      }
      std::fill_n(dst, plane, 0.0f);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          if (src[static_cast<std::size_t>(y) * w + x] != b) continue;
          for (int ey : pre_y[y])
            for (int ex : pre_x[x]) {
              const int x0 = std::max(0, ex - half), x1 = std::min(w - 1, ex + half);
              for (int q = std::max(0, ey - half); q <= std::min(h - 1, ey + half); ++q) {
                float* row = dst + static_cast<std::size_t>(q) * w;
                for (int r = x0; r <= x1; ++r) row[r] += 1.0f;
              }
            }
        }
      continue;
    }
    for (std::size_t i = 0; i < plane; ++i) indicator[i] = src[i] == b ? 1.0f : 0.0f;
    filter.apply(indicator, h, w, patch_size, pad, 1.0, out.subspan(b * plane, plane));
  }
}

HistogramField patch_histograms(const BinIndexMap& bins, int patch_size, Pad pad) {
  check_kernel_size(patch_size);
  const int n_bins = bins.n_bins;
  HistogramField hf;
  hf.channels = bins.channels;
  hf.height = bins.height;
  hf.width = bins.width;
  hf.patch_size = patch_size;
  hf.n_bins = n_bins;
  hf.counts.assign(static_cast<std::size_t>(bins.channels) * n_bins * bins.plane_size(),
                   0.0f);
  const std::size_t per_channel = static_cast<std::size_t>(n_bins) * bins.plane_size();
  const std::size_t workers = workers_for(bins.channels);
  std::vector<BoxFilter> filters(workers);
  std::vector<std::vector<float>> scratch(workers);
  parallel_for(bins.channels, [&](std::size_t w, std::size_t c) {
    channel_histograms(bins, static_cast<int>(c), n_bins, patch_size, pad, filters[w],
                       scratch[w],
                       std::span(hf.counts).subspan(c * per_channel, per_channel));
  });
  return hf;
}

std::vector<Location> sample_grid(int height, int width, int budget) {
  if (budget < 1) throw ArgumentError("sample budget must be >= 1");
  const double area = static_cast<double>(height) * width;
  int stride = std::max(1, static_cast<int>(std::ceil(std::sqrt(area / budget))));
  auto count = [&](int s) {
    return static_cast<long long>((height + s - 1) / s) * ((width + s - 1) / s);
  };
  while (count(stride) > budget) ++stride;
  const int ny = (height + stride - 1) / stride;
  const int nx = (width + stride - 1) / stride;
  const int oy = (height - 1 - (ny - 1) * stride) / 2;
  const int ox = (width - 1 - (nx - 1) * stride) / 2;
  std::vector<Location> grid;
  grid.reserve(static_cast<std::size_t>(ny) * nx);
  for (int i = 0; i < ny; ++i)
    for (int j = 0; j < nx; ++j) grid.push_back({oy + i * stride, ox + j * stride});
  return grid;
}

namespace {

int patch_index(int i, int n, Pad pad) {
  if (pad == Pad::kWrap) return wrap_index(i, n);
  if (pad == Pad::kReflect) return reflect_index(i, n);
  throw ArgumentError("reference patches need reflect or wrap padding");
}

// Lower median: element (n - 1) / 2 of the sorted sequence.
template <typename T>
T lower_median(std::vector<T>& v) {
  auto mid = v.begin() + (v.size() - 1) / 2;
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

}  // namespace

std::vector<double> rank_reference_values(std::span<const float> channel, int height,
                                          int width, int patch_size,
                                          std::span<const Location> samples,
                                          RankStatistic stat, Pad pad) {
  check_kernel_size(patch_size);
  if (samples.empty()) throw ArgumentError("no reference samples");
  const int half = patch_size / 2;
  const std::size_t m = static_cast<std::size_t>(patch_size) * patch_size;
  const std::size_t s_count = samples.size();
  // rank-major so each rank's values are contiguous
  std::vector<double> by_rank(m * s_count);
  std::vector<float> patch(m);
  for (std::size_t s = 0; s < s_count; ++s) {
    std::size_t k = 0;
    for (int dy = -half; dy <= half; ++dy) {
      const int y = patch_index(samples[s].y + dy, height, pad);
      for (int dx = -half; dx <= half; ++dx)
        patch[k++] = channel[static_cast<std::size_t>(y) * width +
                             patch_index(samples[s].x + dx, width, pad)];
    }
    std::sort(patch.begin(), patch.end());
    for (std::size_t r = 0; r < m; ++r) by_rank[r * s_count + s] = patch[r];
  }
  std::vector<double> out(m);
  std::vector<double> column(s_count);
  for (std::size_t r = 0; r < m; ++r) {
    std::copy_n(by_rank.begin() + r * s_count, s_count, column.begin());
    if (stat == RankStatistic::kMedian) {
      out[r] = lower_median(column);
    } else {
      out[r] = std::accumulate(column.begin(), column.end(), 0.0) / s_count;
    }
  }
  return out;
}

std::vector<double> reference_from_histograms(std::span<const int> sampled, int n_bins,
                                              int patch_size, ReferenceMode mode) {
  const int mass = patch_size * patch_size;
  const std::size_t s_count = sampled.size() / n_bins;
  if (s_count == 0 || sampled.size() % n_bins != 0)
    throw ArgumentError("sampled histogram matrix must be N x S with S >= 1");
  if (mode == ReferenceMode::kMeanQuan)
    throw ArgumentError("mean-quan needs feature values, not histograms");
  std::vector<double> weights(n_bins, 0.0);

  if (mode == ReferenceMode::kMedianQuan) {
    // cum[s] holds the running count of sample s up to the current bin.
    // Rank r of sample s lies in the first bin whose cumulative count
    // exceeds r, so above[r] = #{s : cum_s(bin) > r} reaching median_rank+1
    // marks the bin holding the lower median of rank r.
    const std::size_t need = (s_count - 1) / 2 + 1;
    std::vector<int> cum(s_count, 0);
    std::vector<std::size_t> at_count(mass + 1);
    std::vector<std::size_t> above(mass);
    int rank = 0;
    for (int b = 0; b < n_bins && rank < mass; ++b) {
      const int* row = sampled.data() + static_cast<std::size_t>(b) * s_count;
      if (std::all_of(row, row + s_count, [](int v) { return v == 0; })) continue;
      std::fill(at_count.begin(), at_count.end(), 0);
      for (std::size_t s = 0; s < s_count; ++s) {
        cum[s] += row[s];
        ++at_count[std::min(cum[s], mass)];
      }
      std::size_t suffix = at_count[mass];
      for (int r = mass - 1; r >= 0; --r) {
        above[r] = suffix;
        suffix += at_count[r];
      }
      while (rank < mass && above[rank] >= need) {
        weights[b] += 1.0;
        ++rank;
      }
    }
    if (rank < mass) throw MassError("sampled histograms do not carry T^2 mass");
    return weights;
  }

  if (mode == ReferenceMode::kQuanMedian) {
    std::vector<int> column(s_count);
    for (int b = 0; b < n_bins; ++b) {
      std::copy_n(sampled.begin() + static_cast<std::size_t>(b) * s_count, s_count,
                  column.begin());
      weights[b] = lower_median(column);
    }
  }
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (mode == ReferenceMode::kQuanMean || total == 0.0) {
    // quan-median can leave every bin at zero when the samples disagree
    // everywhere; the mean is the closest well-defined fallback.
    std::fill(weights.begin(), weights.end(), 0.0);
    for (int b = 0; b < n_bins; ++b)
      for (std::size_t s = 0; s < s_count; ++s)
        weights[b] += sampled[static_cast<std::size_t>(b) * s_count + s];
    total = std::accumulate(weights.begin(), weights.end(), 0.0);
  }
  for (auto& w : weights) w *= mass / total;
  return weights;
}

ReferenceHistogram select_reference(const FeatureMap& f, const Quantizer& q, int patch_size,
                                    ReferenceMode mode, int sample_budget, Pad pad) {
  check_kernel_size(patch_size);
  if (q.channels() != f.channels)
    throw ArgumentError("quantizer fitted on a different channel count");
  const int n = q.n_bins;
  const int mass = patch_size * patch_size;
  const int half = patch_size / 2;
  const auto samples = sample_grid(f.height, f.width, sample_budget);
  const BinIndexMap bins = bin_indices(f, q);

  ReferenceHistogram ref{f.channels, n, patch_size,
                         std::vector<double>(static_cast<std::size_t>(f.channels) * n, 0.0)};
  parallel_for(f.channels, [&](std::size_t, std::size_t cu) {
    const int c = static_cast<int>(cu);
    double* out = ref.weights.data() + cu * n;
    if (q.degenerate[c]) {
      out[0] = mass;
      return;
    }
    if (mode == ReferenceMode::kMeanQuan) {
      const auto values = rank_reference_values(f.channel(c), f.height, f.width, patch_size,
                                                samples, RankStatistic::kMean, pad);
      for (double v : values) out[q.bin(c, static_cast<float>(v))] += 1.0;
      return;
    }
    std::vector<int> sampled(samples.size() * n, 0);
    const auto src = bins.channel(c);
    for (std::size_t s = 0; s < samples.size(); ++s)
      for (int dy = -half; dy <= half; ++dy) {
        const int y = patch_index(samples[s].y + dy, f.height, pad);
        for (int dx = -half; dx <= half; ++dx) {
          const int x = patch_index(samples[s].x + dx, f.width, pad);
          ++sampled[src[static_cast<std::size_t>(y) * f.width + x] * samples.size() + s];
        }
      }
    const auto w = reference_from_histograms(sampled, n, patch_size, mode);
    std::copy(w.begin(), w.end(), out);
  });
  return ref;
}

}  // namespace qfca
