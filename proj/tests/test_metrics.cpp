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
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <json.hpp>

#include "oracles.hpp"
#include "qfca/error.hpp"
#include "qfca/metrics.hpp"

namespace {

using qfca::EvalSample;
using qfca::Mask;
using qfca::Plane;

EvalSample random_sample(std::mt19937& rng, int h, int w, int levels, bool anomalous,
                         int border = 0) {
  EvalSample s{Plane(h, w), Mask(h, w, 0), anomalous, border};
  std::uniform_int_distribution<int> lv(0, levels - 1);
  for (auto& v : s.scores.data) v = static_cast<float>(lv(rng));
  if (anomalous) {
    std::uniform_int_distribution<int> py(0, h - 1), px(0, w - 1), side(1, 3);
    const int blobs = 1 + static_cast<int>(rng() % 2);
    for (int k = 0; k < blobs; ++k) {
      const int y0 = py(rng), x0 = px(rng), a = side(rng), b = side(rng);
      for (int y = y0; y < std::min(h, y0 + a); ++y)
        for (int x = x0; x < std::min(w, x0 + b); ++x) {
          s.mask(y, x) = 1;
          s.scores(y, x) += 1.5f;
        }
    }
  }
  return s;
}

TEST(Auroc, Examples) {
  const std::vector<float> s = {0.1f, 0.4f, 0.35f, 0.8f};
  const std::vector<std::uint8_t> l = {0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(*qfca::auroc(s, l), 0.75);
  const std::vector<float> perfect = {0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(*qfca::auroc(perfect, l), 1.0);
  const std::vector<float> flat(4, 0.3f);
  EXPECT_DOUBLE_EQ(*qfca::auroc(flat, l), 0.5);
  const std::vector<std::uint8_t> one_class(4, 1);
  EXPECT_FALSE(qfca::auroc(s, one_class).has_value());
}

TEST(Auroc, MatchesPairCount) {
  std::mt19937 rng(1);
  for (int trial = 0; trial < 300; ++trial) {
    std::uniform_int_distribution<int> len(2, 60), lv(0, 5);
    const int n = len(rng);
    std::vector<float> s(n);
    std::vector<std::uint8_t> l(n);
    for (int i = 0; i < n; ++i) {
      s[i] = static_cast<float>(lv(rng));
      l[i] = rng() % 3 == 0;
    }
    const auto a = qfca::auroc(s, l);
    const auto b = oracle::pairwise_auroc(s, l);
    ASSERT_EQ(a.has_value(), b.has_value());
    if (a) ASSERT_NEAR(*a, *b, 1e-12);
  }
}

TEST(Components, Examples) {
  Mask empty(4, 4, 0);
  EXPECT_EQ(qfca::connected_components(empty).count, 0);
  Mask diag(3, 3, 0);
  diag(0, 0) = diag(1, 1) = 1;
  EXPECT_EQ(qfca::connected_components(diag).count, 1);
  Mask split(3, 3, 0);
  split(0, 1) = split(2, 1) = 1;
  const auto c = qfca::connected_components(split);
  EXPECT_EQ(c.count, 2);
  EXPECT_EQ(c.labels(0, 1), 1);
  EXPECT_EQ(c.labels(2, 1), 2);
}

TEST(Components, MatchFloodFill) {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    Mask m(10, 13, 0);
    for (auto& v : m.data) v = rng() % 5 < 2;
    const auto a = qfca::connected_components(m);
    const auto [lab, n] = oracle::flood_components(m);
    ASSERT_EQ(a.count, n);
    ASSERT_EQ(a.labels.data, lab.data);
  }
}

TEST(Pro, PerfectAndConstantScores) {
  EvalSample s{Plane(8, 8, 0.0f), Mask(8, 8, 0), true, 0};
  for (int y = 2; y < 5; ++y)
    for (int x = 1; x < 4; ++x) s.mask(y, x) = 1;
  for (std::size_t i = 0; i < s.mask.size(); ++i) s.scores.data[i] = s.mask.data[i];
  const std::vector<EvalSample> perfect = {s};
  EXPECT_NEAR(*qfca::pro_at_fpr(perfect), 1.0, 1e-12);

  // a single threshold: the curve is the diagonal, area 0.3^2 / 2 over 0.3
  EvalSample flat = s;
  std::fill(flat.scores.data.begin(), flat.scores.data.end(), 0.4f);
  const std::vector<EvalSample> diag = {flat};
  EXPECT_NEAR(*qfca::pro_at_fpr(diag), 0.15, 1e-12);
  EXPECT_NEAR(*oracle::exhaustive_pro(diag, 0.3), 0.15, 1e-12);
}

TEST(Pro, UndefinedWithoutRegionsOrNormals) {
  const std::vector<EvalSample> good = {{Plane(4, 4, 1.0f), Mask(4, 4, 0), false, 0}};
  EXPECT_FALSE(qfca::pro_at_fpr(good).has_value());
  const std::vector<EvalSample> all = {{Plane(4, 4, 1.0f), Mask(4, 4, 1), true, 0}};
  EXPECT_FALSE(qfca::pro_at_fpr(all).has_value());
}

TEST(Pro, AgreesWithExhaustiveSweep) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<EvalSample> samples;
    const int n = 1 + trial % 3;
    for (int k = 0; k < n; ++k)
      samples.push_back(random_sample(rng, 8, 8, trial % 2 ? 4 : 1000, k == 0, trial % 4 == 3));
    const auto a = qfca::pro_at_fpr(samples);
    const auto b = oracle::exhaustive_pro(samples, 0.3);
    ASSERT_EQ(a.has_value(), b.has_value());
    if (a) ASSERT_NEAR(*a, *b, 0.01) << "trial " << trial;
  }
}

TEST(F1, Examples) {
  const std::vector<float> s = {0.9f, 0.8f, 0.1f};
  const std::vector<std::uint8_t> l = {1, 0, 1};
  const auto r = qfca::f1_optimal(s, l);
  ASSERT_TRUE(r.has_value());
  EXPECT_NEAR(r->f1, 0.8, 1e-12);
  EXPECT_EQ(r->threshold, 0.1f);
  const std::vector<float> perfect = {1, 0, 1};
  EXPECT_NEAR(qfca::f1_optimal(perfect, l)->f1, 1.0, 1e-12);
  const std::vector<std::uint8_t> none(3, 0);
  EXPECT_FALSE(qfca::f1_optimal(s, none).has_value());
}

TEST(F1, AgreesWithExhaustiveSweepExactly) {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    std::uniform_int_distribution<int> len(1, 64), lv(0, 6);
    const int n = len(rng);
    std::vector<float> s(n);
    std::vector<std::uint8_t> l(n);
    for (int i = 0; i < n; ++i) {
      s[i] = static_cast<float>(lv(rng));
      l[i] = rng() % 2;
    }
    const auto a = qfca::f1_optimal(s, l);
    const auto b = oracle::exhaustive_f1(s, l);
    ASSERT_EQ(a.has_value(), b.has_value());
    if (a) ASSERT_DOUBLE_EQ(a->f1, *b);
  }
}

TEST(ImageAuroc, Examples) {
  std::vector<EvalSample> samples;
  for (int k = 0; k < 4; ++k) {
    EvalSample s{Plane(4, 4, float(k)), Mask(4, 4, 0), k >= 2, 0};
    if (s.anomalous) s.mask(1, 1) = 1;
    samples.push_back(s);
  }
  EXPECT_DOUBLE_EQ(*qfca::auroc_image(samples), 1.0);
  for (auto& s : samples) std::fill(s.scores.data.begin(), s.scores.data.end(), 1.0f);
  EXPECT_DOUBLE_EQ(*qfca::auroc_image(samples), 0.5);
}

std::vector<EvalSample> random_class(std::mt19937& rng, int border) {
  std::vector<EvalSample> out;
  for (int k = 0; k < 6; ++k) out.push_back(random_sample(rng, 12, 12, 50, k < 4, border));
  return out;
}

void expect_same(const qfca::MetricReport& a, const qfca::MetricReport& b) {
  ASSERT_EQ(a.pro.has_value(), b.pro.has_value());
  if (a.pro) EXPECT_NEAR(*a.pro, *b.pro, 1e-12);
  EXPECT_NEAR(*a.auroc_s, *b.auroc_s, 1e-12);
  EXPECT_NEAR(*a.f1, *b.f1, 1e-12);
  EXPECT_NEAR(*a.auroc_c, *b.auroc_c, 1e-12);
}

TEST(Report, MonotoneTransformInvariance) {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    auto samples = random_class(rng, 0);
    auto mapped = samples;
    for (auto& s : mapped)
      for (auto& v : s.scores.data) v = std::exp(0.3f * v) - 2.0f;
    expect_same(qfca::evaluate_samples("a", samples), qfca::evaluate_samples("a", mapped));
  }
}

TEST(Report, BorderPixelsDoNotMatter) {
  std::mt19937 rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    auto samples = random_class(rng, 2);
    auto changed = samples;
    for (auto& s : changed)
      for (int y = 0; y < 12; ++y)
        for (int x = 0; x < 12; ++x)
          if (y < 2 || x < 2 || y >= 10 || x >= 10) {
            s.scores(y, x) = static_cast<float>(rng() % 100);
            s.mask(y, x) = rng() % 2;
          }
    expect_same(qfca::evaluate_samples("b", samples), qfca::evaluate_samples("b", changed));
  }
}

TEST(Report, JsonShapeAndMean) {
  qfca::MetricReport a{"x", 0.9, 0.95, 0.5, 1.0, 3};
  qfca::MetricReport b{"y", std::nullopt, 0.85, 0.7, 0.5, 2};
  const std::vector<qfca::MetricReport> reports = {a, b};
  const auto mean = qfca::mean_report(reports);
  EXPECT_NEAR(*mean.pro, 0.9, 1e-12);
  EXPECT_NEAR(*mean.auroc_s, 0.9, 1e-12);
  const auto doc = nlohmann::ordered_json::parse(qfca::report_json(reports));
  EXPECT_TRUE(doc["y"]["pro"].is_null());
  EXPECT_EQ(doc["x"]["n_images"], 3);
  EXPECT_NEAR(doc["mean"]["f1"].get<double>(), 0.6, 1e-12);
  std::vector<std::string> keys;
  for (auto it = doc.begin(); it != doc.end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"x", "y", "mean"}));
}

TEST(Samples, ShapeChecks) {
  EvalSample s{Plane(4, 4), Mask(4, 5), false, 0};
  EXPECT_THROW(qfca::check_sample(s), qfca::ArgumentError);
  EvalSample b{Plane(4, 4), Mask(4, 4), false, 2};
  EXPECT_THROW(qfca::check_sample(b), qfca::ArgumentError);
}

}  // namespace
