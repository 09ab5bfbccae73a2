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
#include "qfca/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "qfca/error.hpp"

namespace qfca {

namespace {

bool interior(const EvalSample& s, int y, int x) {
  const int b = s.border;
  return y >= b && y < s.scores.height - b && x >= b && x < s.scores.width - b;
}

// Interior scores and labels of all samples, in sample then raster order.
void pool(std::span<const EvalSample> samples, std::vector<float>& scores,
          std::vector<std::uint8_t>& labels) {
  for (const auto& s : samples) {
    check_sample(s);
    for (int y = s.border; y < s.scores.height - s.border; ++y)
      for (int x = s.border; x < s.scores.width - s.border; ++x) {
        scores.push_back(s.scores(y, x));
        labels.push_back(s.mask(y, x) ? 1 : 0);
      }
  }
}

std::vector<std::size_t> order_descending(std::span<const float> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

int find(std::vector<int>& parent, int a) {
  while (parent[a] != a) {
    parent[a] = parent[parent[a]];
    a = parent[a];
  }
  return a;
}

}  // namespace

void check_sample(const EvalSample& s) {
  if (s.scores.height != s.mask.height || s.scores.width != s.mask.width)
    throw ArgumentError("score map and mask differ in shape");
  if (s.border < 0 || 2 * s.border >= std::min(s.scores.height, s.scores.width))
    throw ArgumentError("border exclusion " + std::to_string(s.border) +
                        " leaves no pixels");
}

std::optional<double> auroc(std::span<const float> scores,
                            std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw ArgumentError("scores and labels differ in size");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t lo = 0; lo < order.size();) {
    std::size_t hi = lo + 1;
    while (hi < order.size() && scores[order[hi]] == scores[order[lo]]) ++hi;
    const double avg_rank = 0.5 * static_cast<double>(lo + 1 + hi);  // 1-based
    for (std::size_t k = lo; k < hi; ++k)
      if (labels[order[k]]) {
        rank_sum += avg_rank;
        ++n_pos;
      }
    lo = hi;
  }
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  const double np = static_cast<double>(n_pos);
  return (rank_sum - np * (np + 1) / 2) / (np * static_cast<double>(n_neg));
}

std::optional<double> auroc_pixel(std::span<const EvalSample> samples) {
  std::vector<float> scores;
  std::vector<std::uint8_t> labels;
  pool(samples, scores, labels);
  return auroc(scores, labels);
}

Components connected_components(const Mask& mask) {
  const int h = mask.height, w = mask.width;
  std::vector<int> parent(static_cast<std::size_t>(h) * w);
  std::iota(parent.begin(), parent.end(), 0);
  auto on = [&](int y, int x) { return y >= 0 && x >= 0 && x < w && mask(y, x) != 0; };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!on(y, x)) continue;
      const int id = y * w + x;
      // already-visited 8-neighbours
      const int nbr[4][2] = {{y, x - 1}, {y - 1, x - 1}, {y - 1, x}, {y - 1, x + 1}};
      for (const auto& n : nbr)
        if (on(n[0], n[1])) {
          const int a = find(parent, id), b = find(parent, n[0] * w + n[1]);
          if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    }
  Components out;
  out.labels = Grid<int>(h, w, 0);
  std::vector<int> label_of(parent.size(), 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!on(y, x)) continue;
      const int root = find(parent, y * w + x);
      if (label_of[root] == 0) label_of[root] = ++out.count;
      out.labels(y, x) = label_of[root];
    }
  return out;
}

std::optional<double> pro_at_fpr(std::span<const EvalSample> samples, double fpr_limit,
                                 int n_thresholds) {
  if (!(fpr_limit > 0 && fpr_limit <= 1)) throw ArgumentError("fpr limit must be in (0, 1]");
  if (n_thresholds < 2) throw ArgumentError("need at least 2 thresholds");
  // region id per pooled pixel, -1 for normal pixels
  std::vector<float> scores;
  std::vector<int> region;
  std::vector<double> region_size;
  for (const auto& s : samples) {
    check_sample(s);
    Mask inner(s.mask.height, s.mask.width, 0);
    for (int y = 0; y < s.mask.height; ++y)
      for (int x = 0; x < s.mask.width; ++x)
        inner(y, x) = interior(s, y, x) && s.mask(y, x) ? 1 : 0;
    const Components cc = connected_components(inner);
    const int base = static_cast<int>(region_size.size());
    region_size.resize(base + cc.count, 0.0);
    for (int y = s.border; y < s.scores.height - s.border; ++y)
      for (int x = s.border; x < s.scores.width - s.border; ++x) {
        scores.push_back(s.scores(y, x));
        const int l = cc.labels(y, x);
        region.push_back(l > 0 ? base + l - 1 : -1);
        if (l > 0) region_size[base + l - 1] += 1.0;
      }
  }
  const std::size_t n_regions = region_size.size();
  const auto n_normal = static_cast<double>(std::count(region.begin(), region.end(), -1));
  if (n_regions == 0 || n_normal == 0) return std::nullopt;

  std::vector<float> sorted(scores);
  std::sort(sorted.begin(), sorted.end());
  std::vector<float> thresholds;
  const std::size_t m = sorted.size();
  for (int k = n_thresholds - 1; k >= 0; --k) {
    const std::size_t idx = static_cast<std::size_t>(
        std::llround(static_cast<double>(k) * (m - 1) / (n_thresholds - 1)));
    if (thresholds.empty() || sorted[idx] < thresholds.back()) thresholds.push_back(sorted[idx]);
  }

  const auto order = order_descending(scores);
  std::vector<double> fpr{0.0}, pro{0.0};
  double overlap_sum = 0.0;  // sum over regions of hit fraction
  double false_pos = 0.0;
  std::size_t next = 0;
  for (float t : thresholds) {
    while (next < m && scores[order[next]] >= t) {
      const int r = region[order[next]];
      if (r < 0) false_pos += 1.0;
      else overlap_sum += 1.0 / region_size[r];
      ++next;
    }
    fpr.push_back(false_pos / n_normal);
    pro.push_back(overlap_sum / n_regions);
  }
  fpr.push_back(1.0);
  pro.push_back(1.0);

  double area = 0.0;
  for (std::size_t i = 1; i < fpr.size(); ++i) {
    const double x0 = fpr[i - 1], y0 = pro[i - 1];
    if (x0 >= fpr_limit) break;
    double x1 = fpr[i], y1 = pro[i];
    if (x1 > fpr_limit) {
      y1 = y0 + (y1 - y0) * (fpr_limit - x0) / (x1 - x0);
      x1 = fpr_limit;
    }
    area += 0.5 * (x1 - x0) * (y0 + y1);
  }
  return area / fpr_limit;
}

std::optional<F1Result> f1_optimal(std::span<const float> scores,
                                   std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw ArgumentError("scores and labels differ in size");
  const double positives =
      static_cast<double>(std::count_if(labels.begin(), labels.end(), [](auto l) { return l; }));
  if (positives == 0) return std::nullopt;
  const auto order = order_descending(scores);
  F1Result best;
  double tp = 0.0;
  for (std::size_t lo = 0; lo < order.size();) {
    std::size_t hi = lo;
    while (hi < order.size() && scores[order[hi]] == scores[order[lo]]) {
      if (labels[order[hi]]) tp += 1.0;
      ++hi;
    }
    const double precision = tp / static_cast<double>(hi);
    const double recall = tp / positives;
    const double f1 = tp > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
    if (f1 > best.f1) best = {f1, scores[order[lo]]};
    lo = hi;
  }
  return best;
}

std::optional<F1Result> f1_optimal(std::span<const EvalSample> samples) {
  std::vector<float> scores;
  std::vector<std::uint8_t> labels;
  pool(samples, scores, labels);
  return f1_optimal(scores, labels);
}

std::optional<double> auroc_image(std::span<const EvalSample> samples) {
  std::vector<float> scores;
  std::vector<std::uint8_t> labels;
  for (const auto& s : samples) {
    check_sample(s);
    float best = s.scores(s.border, s.border);
    for (int y = s.border; y < s.scores.height - s.border; ++y)
      for (int x = s.border; x < s.scores.width - s.border; ++x)
        best = std::max(best, s.scores(y, x));
    scores.push_back(best);
    labels.push_back(s.anomalous ? 1 : 0);
  }
  return auroc(scores, labels);
}

MetricReport evaluate_samples(std::string name, std::span<const EvalSample> samples,
                              double fpr_limit) {
  MetricReport r;
  r.name = std::move(name);
  r.n_images = static_cast<int>(samples.size());
  std::vector<float> scores;
  std::vector<std::uint8_t> labels;
  pool(samples, scores, labels);
  r.auroc_s = auroc(scores, labels);
  if (auto f1 = f1_optimal(scores, labels)) r.f1 = f1->f1;
  r.pro = pro_at_fpr(samples, fpr_limit, r.n_thresholds);
  r.auroc_c = auroc_image(samples);
  return r;
}

MetricReport mean_report(std::span<const MetricReport> classes) {
  MetricReport mean;
  mean.name = "mean";
  auto avg = [&](auto member) -> std::optional<double> {
    double sum = 0.0;
    int n = 0;
    for (const auto& c : classes)
      if (c.*member) {
        sum += *(c.*member);
        ++n;
      }
    if (n == 0) return std::nullopt;
    return sum / n;
  };
  mean.pro = avg(&MetricReport::pro);
  mean.auroc_s = avg(&MetricReport::auroc_s);
  mean.f1 = avg(&MetricReport::f1);
  mean.auroc_c = avg(&MetricReport::auroc_c);
  for (const auto& c : classes) mean.n_images += c.n_images;
  return mean;
}

std::string report_json(std::span<const MetricReport> classes) {
  auto entry = [](const MetricReport& r) {
    nlohmann::ordered_json j;
    auto put = [&](const char* key, const std::optional<double>& v) {
      j[key] = v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    };
    put("pro", r.pro);
    put("auroc_s", r.auroc_s);
    put("f1", r.f1);
    put("auroc_c", r.auroc_c);
    j["n_images"] = r.n_images;
    return j;
  };
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& c : classes) doc[c.name] = entry(c);
  doc["mean"] = entry(mean_report(classes));
  return doc.dump();
}

}  // namespace qfca
