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

#include "gci/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gci/error.hpp"

namespace gci {

namespace {

void finish(EvalReport& r) {
  if (r.n_cycles > 0) {
    const double n = static_cast<double>(r.n_cycles);
    r.idr = 100.0 * static_cast<double>(r.identified) / n;
    r.mr = 100.0 * static_cast<double>(r.missed) / n;
    r.far = 100.0 * static_cast<double>(r.false_alarms) / n;
  } else {
    r.idr = r.mr = r.far = 0.0;
  }
  r.ida_ms = 0.0;
  if (!r.timing_errors.empty()) {
    double mean = 0.0;
    for (double e : r.timing_errors) mean += e;
    mean /= static_cast<double>(r.timing_errors.size());
    double var = 0.0;
    for (double e : r.timing_errors) var += (e - mean) * (e - mean);
    var /= static_cast<double>(r.timing_errors.size());
    r.ida_ms = 1000.0 * std::sqrt(var);
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

EvalReport evaluate(const GciLabels& reference, const GciLabels& detected, int sample_rate) {
  if (sample_rate <= 0) throw DataError("evaluate: sample rate must be positive");
  const std::size_t n = reference.size();
  if (n < 2) {
    throw DataError("evaluate: need at least 2 reference marks, got " + std::to_string(n));
  }
  std::vector<double> r(reference.begin(), reference.end());
  std::vector<double> lo(n), hi(n);
  for (std::size_t k = 0; k < n; ++k) {
    lo[k] = k == 0 ? r[0] - 0.5 * (r[1] - r[0]) : 0.5 * (r[k - 1] + r[k]);
    hi[k] = k + 1 == n ? r[k] + 0.5 * (r[k] - r[k - 1]) : 0.5 * (r[k] + r[k + 1]);
  }

  std::vector<std::size_t> count(n, 0);
  std::vector<double> first_hit(n, 0.0);
  EvalReport rep;
  rep.n_cycles = n;
  for (std::int64_t d : detected) {
    const double x = static_cast<double>(d);
    // First cycle whose upper edge is >= x; cycles tile (lo[0], hi[n-1]].
    const auto it = std::lower_bound(hi.begin(), hi.end(), x);
    if (it == hi.end() || !(x > lo[static_cast<std::size_t>(it - hi.begin())])) {
      ++rep.ignored_detections;
      continue;
    }
    const auto k = static_cast<std::size_t>(it - hi.begin());
    if (count[k]++ == 0) first_hit[k] = x;
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (count[k] == 0) {
      ++rep.missed;
    } else if (count[k] == 1) {
      ++rep.identified;
      rep.timing_errors.push_back((first_hit[k] - r[k]) / sample_rate);
    } else {
      ++rep.false_alarms;
    }
  }
  finish(rep);
  return rep;
}

EvalReport aggregate(std::span<const EvalReport> reports) {
  if (reports.empty()) throw DataError("aggregate: no reports");
  EvalReport out;
  for (const EvalReport& r : reports) {
    out.n_cycles += r.n_cycles;
    out.identified += r.identified;
    out.missed += r.missed;
    out.false_alarms += r.false_alarms;
    out.ignored_detections += r.ignored_detections;
    out.timing_errors.insert(out.timing_errors.end(), r.timing_errors.begin(), r.timing_errors.end());
  }
  finish(out);
  return out;
}

std::string report_text(const EvalReport& r) {
  std::string s;
  s += "n_cycles = " + std::to_string(r.n_cycles) + "\n";
  s += "identified = " + std::to_string(r.identified) + "\n";
  s += "missed = " + std::to_string(r.missed) + "\n";
  s += "false_alarms = " + std::to_string(r.false_alarms) + "\n";
  s += "ignored_detections = " + std::to_string(r.ignored_detections) + "\n";
  s += "idr = " + fmt(r.idr) + "\n";
  s += "mr = " + fmt(r.mr) + "\n";
  s += "far = " + fmt(r.far) + "\n";
  s += "ida_ms = " + fmt(r.ida_ms) + "\n";
  return s;
}

std::string report_csv_header() {
  return "utterance_id,n_cycles,idr,mr,far,ida_ms,ignored_detections\n";
}

std::string report_csv_row(const std::string& utterance_id, const EvalReport& r) {
  return utterance_id + "," + std::to_string(r.n_cycles) + "," + fmt(r.idr) + "," + fmt(r.mr) +
         "," + fmt(r.far) + "," + fmt(r.ida_ms) + "," + std::to_string(r.ignored_detections) + "\n";
}

}  // namespace gci
