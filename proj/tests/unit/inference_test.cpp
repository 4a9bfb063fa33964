/*
Copyright 2026 The gcinet Authors. All rights reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "gci/error.hpp"
#include "gci/framing.hpp"
#include "gci/inference.hpp"
#include "gci/synth.hpp"
#include "oracles.hpp"
#include "scratch.hpp"

namespace gci {
namespace {

std::vector<CandidateGci> random_candidates(std::mt19937_64& rng, std::size_t len) {
  std::uniform_real_distribution<double> loc(0.0, static_cast<double>(len) - 1e-9);
  std::uniform_real_distribution<double> p(0.5, 1.0);
  std::vector<CandidateGci> c(rng() % 80);
  for (auto& x : c) x = {loc(rng), p(rng)};
  std::sort(c.begin(), c.end(), [](auto& a, auto& b) { return a.location < b.location; });
  return c;
}

TEST(Cluster, HandExamples) {
  const ClusterConfig cfg;
  EXPECT_TRUE(cluster_candidates({}, cfg, 1000).empty());
  const std::vector<CandidateGci> one = {{100, .9}, {102, .9}, {104, .9}};
  EXPECT_EQ(cluster_candidates(one, cfg, 1000).positions(), (std::vector<std::int64_t>{102}));
  std::vector<CandidateGci> two;
  for (int i = 100; i <= 104; ++i) two.push_back({double(i), 0.8});
  for (int i = 160; i <= 164; ++i) two.push_back({double(i), 0.8});
  EXPECT_EQ(cluster_candidates(two, cfg, 1000).positions(), (std::vector<std::int64_t>{102, 162}));
  // Adjacent bins merge: 104 (bin 20) and 105 (bin 21).
  const std::vector<CandidateGci> adj = {{104, 1.0}, {105, 1.0}};
  EXPECT_EQ(cluster_candidates(adj, cfg, 1000).size(), 1u);
}

TEST(Cluster, MatchesBruteForceOracle) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t len = 200 + rng() % 2000;
    ClusterConfig cfg;
    cfg.bin_size = 1 + rng() % 12;
    const auto c = random_candidates(rng, len);
    const GciLabels got = cluster_candidates(c, cfg, len);
    ASSERT_EQ(got.positions(), oracle::cluster_brute(c, cfg.bin_size)) << "trial " << trial;

    const auto hist = candidate_histogram(c, cfg.bin_size, len);
    double mass = 0.0, bins = 0.0;
    for (const auto& x : c) mass += x.probability;
    for (double h : hist) bins += h;
    ASSERT_NEAR(bins, mass, 1e-9);
    ASSERT_EQ(hist.size(), (len + cfg.bin_size - 1) / cfg.bin_size);

    auto scaled = c;
    for (auto& x : scaled) x.probability *= 0.37;
    ASSERT_EQ(cluster_candidates(scaled, cfg, len), got);
  }
}

TEST(Cluster, OutputsIncreaseAndStayInsideTheirGroup) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = random_candidates(rng, 3000);
    ClusterConfig cfg;
    const auto out = cluster_candidates(c, cfg, 3000).positions();
    for (std::size_t i = 1; i < out.size(); ++i) ASSERT_LT(out[i - 1], out[i]);
    // Rebuild the groups and check each mark sits within its span.
    std::size_t g = 0;
    std::size_t i = 0;
    while (i < c.size()) {
      std::size_t j = i;
      double lo = c[i].location, hi = c[i].location;
      auto bin = [&](std::size_t k) { return static_cast<long>(c[k].location) / 5; };
      while (j + 1 < c.size() && bin(j + 1) - bin(j) <= 1) hi = c[++j].location;
      ASSERT_LT(g, out.size());
      ASSERT_GE(out[g], std::floor(lo));
      ASSERT_LE(out[g], std::ceil(hi));
      ++g;
      i = j + 1;
    }
    ASSERT_EQ(g, out.size());
  }
}

TEST(Cluster, LargerBinsNeverAddMarks) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = random_candidates(rng, 5000);
    // Only nested grids compare: a coarse bin must be a union of fine ones.
    for (std::size_t base : {1, 3, 5, 7}) {
      std::size_t prev = std::numeric_limits<std::size_t>::max();
      for (std::size_t b = base; b <= 64; b *= 2) {
        ClusterConfig cfg;
        cfg.bin_size = b;
        const std::size_t n = cluster_candidates(c, cfg, 5000).size();
        ASSERT_LE(n, prev) << "bin " << b;
        prev = n;
      }
    }
  }
}

TEST(Cluster, PruningAndValidation) {
  ClusterConfig cfg;
  cfg.prune_low_mass = true;
  const std::vector<CandidateGci> c = {{50, 0.6}, {300, 0.7}, {302, 0.7}};
  EXPECT_EQ(cluster_candidates(c, cfg, 1000).positions(), (std::vector<std::int64_t>{301}));
  cfg.prune_low_mass = false;
  EXPECT_EQ(cluster_candidates(c, cfg, 1000).size(), 2u);

  ClusterConfig bad;
  bad.bin_size = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = {};
  bad.threshold = 1.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = {};
  bad.inference_shift = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  const std::vector<CandidateGci> outside = {{1000.5, 0.9}};
  EXPECT_THROW(candidate_histogram(outside, 5, 1000), DataError);
}

TEST(Cluster, OracleCandidatesRecoverTruth) {
  // Candidates built from the positive frames themselves, p = 1.
  SynthSpec s;
  s.duration_s = 0.5;
  s.pitch_periods_ms = {3.0, 9.0};
  const SynthResult r = synth_voiced(s);
  const FrameDataset ds = make_frames(r.speech, r.epochs);
  std::vector<CandidateGci> c;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.t_c(i)) c.push_back({double(ds.origin(i) + 80) + ds.t_r(i), 1.0});
  }
  std::sort(c.begin(), c.end(), [](auto& a, auto& b) { return a.location < b.location; });
  const GciLabels got = cluster_candidates(c, ClusterConfig{}, r.speech.size());
  std::vector<std::int64_t> inner;
  for (std::int64_t e : r.epochs) {
    if (e >= 80 && e < static_cast<std::int64_t>(r.speech.size()) - 80) inner.push_back(e);
  }
  ASSERT_EQ(got.size(), inner.size());
  for (std::size_t i = 0; i < inner.size(); ++i) EXPECT_LE(std::abs(got[i] - inner[i]), 5);
}

// Model with constant outputs: zero weights, head biases chosen.
Model constant_model(double cls_bias, double reg_bias) {
  ModelConfig c;
  c.channels = 2;
  c.head_hidden = 2;
  c.input_scale = InputScale::kNone;
  Model m = build_model(c, 1);
  for (nn::Tensor* p : m.parameters()) p->fill(0.0);
  m.classifier.out.b[0] = cls_bias;
  m.regressor.out.b[0] = reg_bias;
  return m;
}

Waveform noise_signal(std::size_t n, std::uint64_t seed) {
  return white_noise(n, 16000, seed);
}

TEST(Predict, StubModels) {
  const Waveform w = noise_signal(1000, 1);
  EXPECT_TRUE(predict_candidates(constant_model(-50.0, 3.0), w, ClusterConfig{}).empty());
  EXPECT_TRUE(detect(constant_model(-50.0, 3.0), w, ClusterConfig{}).empty());

  const Waveform one = noise_signal(192, 2);
  const auto c = predict_candidates(constant_model(50.0, 7.0), one, ClusterConfig{});
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].location, 87.0);
  EXPECT_EQ(c[0].probability, 1.0);

  ClusterConfig shifted;
  shifted.inference_shift = 4;
  const auto s = predict_candidates(constant_model(50.0, 7.0), w, shifted);
  ASSERT_EQ(s.size(), (1000 - 192) / 4 + 1);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(s[i].location, 87.0 + 4 * i);

  // y_c exactly 0.5 reaches the threshold.
  EXPECT_EQ(predict_candidates(constant_model(0.0, 0.0), one, ClusterConfig{}).size(), 1u);
}

TEST(Predict, Errors) {
  const Model m = constant_model(0.0, 0.0);
  EXPECT_THROW(score_frames(m, noise_signal(191, 1)), DataError);
  Waveform w = noise_signal(400, 1);
  w.sample_rate = 8000;
  EXPECT_THROW(score_frames(m, w), ConfigError);
  Model scaled = m;
  scaled.config.input_scale = InputScale::kPerFrameMaxAbs;
  EXPECT_THROW(score_frames(scaled, noise_signal(400, 1), 1, InferencePath::kWholeSignal),
               ConfigError);
}

void expect_paths_agree(const ModelConfig& cfg, std::uint64_t seed, std::size_t len,
                        std::int64_t shift) {
  Model m = build_model(cfg, seed);
  std::mt19937_64 rng(seed);
  for (nn::Tensor* p : m.parameters()) {
    for (double& v : p->values()) v += 0.1 * std::normal_distribution<double>()(rng);
  }
  const Waveform w = noise_signal(len, seed);
  const Outputs a = score_frames(m, w, shift, InferencePath::kFrameWise);
  const Outputs b = score_frames(m, w, shift, InferencePath::kWholeSignal);
  ASSERT_EQ(a.y_c.size(), (len - cfg.wi_samples) / shift + 1);
  ASSERT_EQ(a.y_c.size(), b.y_c.size());
  for (std::size_t i = 0; i < a.y_c.size(); ++i) {
    ASSERT_NEAR(a.y_c[i], b.y_c[i], 1e-12);
    ASSERT_NEAR(a.y_r[i], b.y_r[i], 1e-12);
  }
  EXPECT_EQ(a.y_c, b.y_c);
  EXPECT_EQ(a.y_r, b.y_r);
}

TEST(WholeSignal, MatchesFrameWise) {
  ModelConfig c;
  c.channels = 3;
  c.head_hidden = 5;
  c.input_scale = InputScale::kNone;
  expect_paths_agree(c, 1, 900, 1);
  expect_paths_agree(c, 2, 1337, 3);
  expect_paths_agree(c, 3, 192, 1);
  ModelConfig flat = c;
  flat.pooling = false;
  flat.num_conv_layers = 3;
  expect_paths_agree(flat, 4, 700, 1);
  ModelConfig deep = c;
  deep.num_conv_layers = 2;
  deep.kernel_size = 3;
  deep.dilations = {3, 1};
  expect_paths_agree(deep, 5, 20000, 1);
}

TEST(Candidates, DumpFormat) {
  testing_support::ScratchDir dir("cands");
  const std::vector<CandidateGci> c = {{87.25, 0.75}, {90.0, 0.5}};
  write_candidates(c, dir / "c.txt");
  std::ifstream in(dir / "c.txt");
  std::string l1, l2, l3;
  std::getline(in, l1);
  std::getline(in, l2);
  EXPECT_EQ(l1, "87.250000 0.750000");
  EXPECT_EQ(l2, "90.000000 0.500000");
  EXPECT_FALSE(std::getline(in, l3));
}

}  // namespace
}  // namespace gci
