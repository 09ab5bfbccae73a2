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

#include <numeric>
#include <random>

#include "oracles.hpp"
#include "qfca/error.hpp"
#include "qfca/quantize.hpp"

namespace {

using qfca::FeatureMap;
using qfca::Pad;
using qfca::ReferenceMode;

FeatureMap random_features(int c, int h, int w, std::uint32_t seed, int levels = 0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  FeatureMap f(c, h, w);
  for (auto& v : f.values) {
    v = u(rng);
    if (levels > 0) v = std::floor(v * levels) / levels;
  }
  return f;
}

TEST(Quantizer, CentersAndBins) {
  FeatureMap f(1, 1, 2);
  f.values = {0.0f, 4.0f};
  const auto q = qfca::fit_quantizer(f, 4);
  EXPECT_EQ(q.centers(0), (std::vector<double>{0.5, 1.5, 2.5, 3.5}));
  EXPECT_EQ(q.bin(0, 0.0f), 0);
  EXPECT_EQ(q.bin(0, 0.999f), 0);
  EXPECT_EQ(q.bin(0, 1.0f), 1);
  EXPECT_EQ(q.bin(0, 3.99f), 3);
  EXPECT_EQ(q.bin(0, 4.0f), 3);
  EXPECT_EQ(q.bin(0, -7.0f), 0);
  EXPECT_EQ(q.bin(0, 9.0f), 3);
}

TEST(Quantizer, DegenerateAndLimits) {
  FeatureMap f(2, 2, 2);
  for (int i = 0; i < 4; ++i) f.values[i] = 3.0f;
  for (int i = 4; i < 8; ++i) f.values[i] = static_cast<float>(i);
  const auto q = qfca::fit_quantizer(f, 8);
  EXPECT_TRUE(q.degenerate[0]);
  EXPECT_FALSE(q.degenerate[1]);
  const auto b = qfca::bin_indices(f, q);
  for (auto v : b.channel(0)) EXPECT_EQ(v, 0);
  EXPECT_THROW(qfca::fit_quantizer(f, 0), qfca::ArgumentError);
  EXPECT_THROW(qfca::fit_quantizer(f, 65537), qfca::ArgumentError);
  EXPECT_NO_THROW(qfca::fit_quantizer(f, 65536));
}

TEST(Histograms, ThreeByThreeExample) {
  // bins [[0,1,1],[1,1,1],[1,1,1]], T = 3, centre pixel
  qfca::BinIndexMap m{1, 3, 3, 16, {0, 1, 1, 1, 1, 1, 1, 1, 1}};
  const auto hf = qfca::patch_histograms(m, 3, Pad::kReflect);
  std::vector<float> centre(16);
  for (int b = 0; b < 16; ++b) centre[b] = hf.at(0, b, 1, 1);
  std::vector<float> expect(16, 0.0f);
  expect[0] = 1;
  expect[1] = 8;
  EXPECT_EQ(centre, expect);
}

TEST(Histograms, MatchOracleCounts) {
  int seed = 1;
  for (Pad pad : {Pad::kReflect, Pad::kWrap, Pad::kZero})
    for (int n_bins : {1, 3, 16, 256}) {
      for (int t : {1, 3, 5, 9}) {
        const int h = 11, w = 14;
        std::mt19937 rng(seed++);
        std::uniform_int_distribution<int> u(0, n_bins - 1);
        qfca::BinIndexMap m{1, h, w, n_bins, std::vector<std::uint16_t>(h * w)};
        std::vector<int> raw(h * w);
        for (int i = 0; i < h * w; ++i) m.bins[i] = static_cast<std::uint16_t>(raw[i] = u(rng));
        const auto hf = qfca::patch_histograms(m, t, pad);
        const auto ref = oracle::patch_counts(raw, h, w, n_bins, t, pad);
        for (std::size_t i = 0; i < ref.size(); ++i)
          ASSERT_EQ(hf.counts[i], static_cast<float>(ref[i]))
              << "pad " << qfca::to_string(pad) << " N=" << n_bins << " T=" << t;
      }
    }
}

TEST(Histograms, FullMassUnderReflectAndWrap) {
  const FeatureMap f = random_features(3, 13, 9, 4);
  const auto q = qfca::fit_quantizer(f, 32);
  const auto bins = qfca::bin_indices(f, q);
  for (Pad pad : {Pad::kReflect, Pad::kWrap}) {
    const auto hf = qfca::patch_histograms(bins, 7, pad);
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < 13; ++y)
        for (int x = 0; x < 9; ++x) {
          double mass = 0;
          for (int b = 0; b < 32; ++b) mass += hf.at(c, b, y, x);
          ASSERT_EQ(mass, 49.0);
        }
  }
}

TEST(SampleGrid, BudgetAndShiftInvariance) {
  for (int budget : {1, 7, 64, 4096}) {
    const auto g = qfca::sample_grid(64, 48, budget);
    EXPECT_LE(static_cast<int>(g.size()), budget);
    EXPECT_FALSE(g.empty());
    for (auto l : g) {
      EXPECT_GE(l.y, 0);
      EXPECT_LT(l.y, 64);
      EXPECT_GE(l.x, 0);
      EXPECT_LT(l.x, 48);
    }
  }
  EXPECT_EQ(qfca::sample_grid(64, 64, 4096).size(), 4096u);
  EXPECT_THROW(qfca::sample_grid(4, 4, 0), qfca::ArgumentError);
}

TEST(Reference, RankMedianExample) {
  // three 1x3 "patches" (values per rank): lower median per rank
  FeatureMap f(1, 1, 9);
  f.values = {1, 1, 5, 0, 3, 2, 1, 4, 3};
  std::vector<qfca::Location> samples = {{0, 1}, {0, 4}, {0, 7}};
  const auto v = qfca::rank_reference_values(f.channel(0), 1, 9, 1, samples,
                                             qfca::RankStatistic::kMedian);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0], 3.0);  // medians of {1, 3, 4}
}

TEST(Reference, RankMedianOverSortedPatches) {
  // constant columns: each 3x3 window holds its column triple three times
  FeatureMap f(1, 3, 9);
  const float cols[9] = {3, 1, 1, 4, 0, 1, 1, 2, 3};
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 9; ++x) f.at(0, y, x) = cols[x];
  std::vector<qfca::Location> samples = {{1, 1}, {1, 4}, {1, 7}};
  const auto v = qfca::rank_reference_values(f.channel(0), 3, 9, 3, samples,
                                             qfca::RankStatistic::kMedian);
  // column triples {3,1,1}, {4,0,1}, {1,2,3}
  EXPECT_EQ(v, (std::vector<double>{1, 1, 1, 1, 1, 1, 3, 3, 3}));
}

TEST(Reference, FastMedianQuanEqualsSortPath) {
  int seed = 20;
  for (int n_bins : {2, 8, 16, 64, 1024})
    for (int t : {1, 3, 5, 9})
      for (int levels : {0, 5}) {
        const FeatureMap f = random_features(2, 24, 20, seed++, levels);
        const auto q = qfca::fit_quantizer(f, n_bins);
        for (int budget : {1, 10, 4096}) {
          const auto ref = qfca::select_reference(f, q, t, ReferenceMode::kMedianQuan, budget);
          const auto samples = qfca::sample_grid(f.height, f.width, budget);
          for (int c = 0; c < 2; ++c) {
            const auto values = qfca::rank_reference_values(
                f.channel(c), f.height, f.width, t, samples, qfca::RankStatistic::kMedian);
            std::vector<double> expect(n_bins, 0.0);
            for (double v : values) expect[q.bin(c, static_cast<float>(v))] += 1;
            const auto got = ref.channel(c);
            ASSERT_EQ(std::vector<double>(got.begin(), got.end()), expect)
                << "N=" << n_bins << " T=" << t << " budget " << budget;
          }
        }
      }
}

TEST(Reference, MassConservedForEveryMode) {
  const FeatureMap f = random_features(3, 17, 15, 77);
  const auto q = qfca::fit_quantizer(f, 16);
  for (auto mode : {ReferenceMode::kMedianQuan, ReferenceMode::kMeanQuan,
                    ReferenceMode::kQuanMedian, ReferenceMode::kQuanMean})
    for (Pad pad : {Pad::kReflect, Pad::kWrap}) {
      const auto ref = qfca::select_reference(f, q, 5, mode, 100, pad);
      for (int c = 0; c < 3; ++c) {
        const auto w = ref.channel(c);
        EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 25.0, 1e-9)
            << qfca::to_string(mode);
        for (double v : w) EXPECT_GE(v, 0.0);
      }
    }
}

TEST(Reference, ConstantPatchesAndDegenerateChannels) {
  FeatureMap f(2, 8, 8);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) f.at(1, y, x) = (x + y) % 2 ? 1.0f : 0.0f;
  const auto q = qfca::fit_quantizer(f, 4);
  const auto ref = qfca::select_reference(f, q, 3);
  EXPECT_EQ(ref.channel(0)[0], 9.0);
  // checkerboard: rank 4 is 0 for half the windows and 1 for the other half;
  // the lower median takes 0
  EXPECT_EQ(ref.channel(1)[0], 5.0);
  EXPECT_EQ(ref.channel(1)[3], 4.0);
}

TEST(Reference, ParseModes) {
  EXPECT_EQ(qfca::parse_reference_mode("median-quan"), ReferenceMode::kMedianQuan);
  EXPECT_EQ(qfca::parse_reference_mode("mean-quan"), ReferenceMode::kMeanQuan);
  EXPECT_EQ(qfca::parse_reference_mode("quan-median"), ReferenceMode::kQuanMedian);
  EXPECT_EQ(qfca::parse_reference_mode("quan-mean"), ReferenceMode::kQuanMean);
  EXPECT_THROW(qfca::parse_reference_mode("median"), qfca::ArgumentError);
  for (auto m : {ReferenceMode::kMedianQuan, ReferenceMode::kQuanMean})
    EXPECT_EQ(qfca::parse_reference_mode(qfca::to_string(m)), m);
}

TEST(Reference, HistogramReductionErrors) {
  std::vector<int> bad(5, 0);
  EXPECT_THROW(qfca::reference_from_histograms(bad, 2, 1, ReferenceMode::kMedianQuan),
               qfca::ArgumentError);
  std::vector<int> light = {0, 0};
  EXPECT_THROW(qfca::reference_from_histograms(light, 2, 1, ReferenceMode::kMedianQuan),
               qfca::MassError);
  EXPECT_THROW(qfca::reference_from_histograms(light, 2, 1, ReferenceMode::kMeanQuan),
               qfca::ArgumentError);
}

}  // namespace
