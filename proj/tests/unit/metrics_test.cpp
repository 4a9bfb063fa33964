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
#include <random>

#include <gtest/gtest.h>

#include "gci/error.hpp"
#include "gci/metrics.hpp"
#include "oracles.hpp"

namespace gci {
namespace {

TEST(Evaluate, HandExamples) {
  const GciLabels ref({100, 260, 420});
  const EvalReport same = evaluate(ref, ref, 16000);
  EXPECT_EQ(same.idr, 100.0);
  EXPECT_EQ(same.mr, 0.0);
  EXPECT_EQ(same.far, 0.0);
  EXPECT_EQ(same.ida_ms, 0.0);
  EXPECT_EQ(same.n_cycles, 3u);

  const EvalReport miss = evaluate(ref, GciLabels({100, 420}), 16000);
  EXPECT_NEAR(miss.idr, 66.7, 0.05);
  EXPECT_NEAR(miss.mr, 33.3, 0.05);
  EXPECT_EQ(miss.far, 0.0);

  const EvalReport fa = evaluate(ref, GciLabels({100, 255, 265, 420}), 16000);
  EXPECT_NEAR(fa.far, 33.3, 0.05);
  EXPECT_NEAR(fa.idr, 66.7, 0.05);
  EXPECT_EQ(fa.false_alarms, 1u);
}

TEST(Evaluate, CycleEdgesAndIgnoredDetections) {
  const GciLabels ref({100, 200});
  // Cycles (50, 150] and (150, 250]; 50 and 251 fall outside both.
  const EvalReport r = evaluate(ref, GciLabels({50, 150, 249, 251}), 16000);
  EXPECT_EQ(r.identified, 2u);
  EXPECT_EQ(r.ignored_detections, 2u);
  ASSERT_EQ(r.timing_errors.size(), 2u);
  EXPECT_DOUBLE_EQ(r.timing_errors[0], 50.0 / 16000);
  EXPECT_DOUBLE_EQ(r.timing_errors[1], 49.0 / 16000);
  EXPECT_NEAR(r.ida_ms, 1000.0 * 0.5 / 16000, 1e-12);
  EXPECT_THROW(evaluate(GciLabels({5}), GciLabels({5}), 16000), DataError);
}

GciLabels random_labels(std::mt19937_64& rng, std::size_t max_count, std::int64_t gap) {
  std::vector<std::int64_t> p;
  std::int64_t at = rng() % 100;
  const std::size_t n = rng() % max_count;
  for (std::size_t i = 0; i < n; ++i) p.push_back(at += 1 + rng() % gap);
  return GciLabels(p);
}

TEST(Evaluate, MatchesBruteForceAndPartitions) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 1000; ++trial) {
    GciLabels ref = random_labels(rng, 60, 300);
    if (ref.size() < 2) ref = GciLabels({10, 200});
    const GciLabels det = random_labels(rng, 80, 250);
    const EvalReport r = evaluate(ref, det, 16000);
    ASSERT_EQ(r.identified + r.missed + r.false_alarms, r.n_cycles);
    const oracle::CycleCount c = oracle::evaluate_brute(ref, det, 16000);
    ASSERT_EQ(r.n_cycles, c.n_cycles);
    ASSERT_EQ(r.identified, c.identified);
    ASSERT_EQ(r.missed, c.missed);
    ASSERT_EQ(r.false_alarms, c.false_alarms);
    ASSERT_NEAR(r.ida_ms, c.ida_ms(), 1e-9);
    ASSERT_NEAR(r.idr + r.mr + r.far, 100.0, 1e-9);

    // Translation invariance.
    std::vector<std::int64_t> rs, ds;
    for (auto v : ref) rs.push_back(v + 777);
    for (auto v : det) ds.push_back(v + 777);
    const EvalReport t = evaluate(GciLabels(rs), GciLabels(ds), 16000);
    ASSERT_EQ(t.identified, r.identified);
    ASSERT_EQ(t.false_alarms, r.false_alarms);
    ASSERT_NEAR(t.ida_ms, r.ida_ms, 1e-9);
  }
}

TEST(Evaluate, InsertionNeverLowersFar) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 200; ++trial) {
    const GciLabels ref = random_labels(rng, 40, 300);
    if (ref.size() < 2) continue;
    std::vector<std::int64_t> det(ref.begin(), ref.end());
    double far = evaluate(ref, GciLabels(det), 16000).far;
    for (int k = 0; k < 10; ++k) {
      const std::int64_t extra = ref[0] + rng() % (ref[ref.size() - 1] - ref[0] + 1);
      if (std::find(det.begin(), det.end(), extra) != det.end()) continue;
      det.insert(std::upper_bound(det.begin(), det.end(), extra), extra);
      const double now = evaluate(ref, GciLabels(det), 16000).far;
      ASSERT_GE(now, far);
      far = now;
    }
  }
}

TEST(Aggregate, Pooling) {
  const GciLabels ref({100, 200, 300, 400, 500, 600, 700, 800, 900, 1000});
  const EvalReport a = evaluate(ref, GciLabels({101, 200, 300, 400, 500, 600, 700, 800, 900, 1003}), 16000);
  const EvalReport b = evaluate(ref, GciLabels({100, 202, 300, 400, 500, 600, 700, 800, 900}), 16000);
  EXPECT_EQ(a.idr, 100.0);
  EXPECT_EQ(b.idr, 90.0);
  const EvalReport one[] = {a};
  EXPECT_EQ(aggregate(one), a);
  const EvalReport both[] = {a, b};
  const EvalReport p = aggregate(both);
  EXPECT_EQ(p.idr, 95.0);
  EXPECT_EQ(p.n_cycles, 20u);
  std::vector<double> all = a.timing_errors;
  all.insert(all.end(), b.timing_errors.begin(), b.timing_errors.end());
  oracle::CycleCount cc;
  cc.errors_s = all;
  EXPECT_NEAR(p.ida_ms, cc.ida_ms(), 1e-12);
  EXPECT_THROW(aggregate({}), DataError);
}

TEST(Report, Formats) {
  const EvalReport r = evaluate(GciLabels({100, 260, 420}), GciLabels({100, 420}), 16000);
  const std::string text = report_text(r);
  EXPECT_NE(text.find("idr = 66.6667"), std::string::npos) << text;
  EXPECT_NE(text.find("n_cycles = 3"), std::string::npos);
  EXPECT_EQ(report_csv_header(), "utterance_id,n_cycles,idr,mr,far,ida_ms,ignored_detections\n");
  EXPECT_EQ(report_csv_row("u1", r), "u1,3,66.6667,33.3333,0.0000,0.0000,0\n");
}

}  // namespace
}  // namespace gci
