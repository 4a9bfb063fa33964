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

// Larynx-cycle scoring.  Each reference mark r_k owns the cycle
// ((r_{k-1} + r_k) / 2, (r_k + r_{k+1}) / 2]; the first and last cycles
// extend by half of the neighbouring period.  A cycle with exactly one
// detection is identified, none is a miss, more than one a false alarm.
// Detections outside every cycle are counted separately and otherwise
// ignored.

#ifndef GCI_METRICS_HPP_
#define GCI_METRICS_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gci/signal.hpp"

namespace gci {

struct EvalReport {
  std::size_t n_cycles = 0;
  std::size_t identified = 0;
  std::size_t missed = 0;
  std::size_t false_alarms = 0;
  std::size_t ignored_detections = 0;
  double idr = 0.0;     // percent
  double mr = 0.0;      // percent
  double far = 0.0;     // percent
  double ida_ms = 0.0;  // population std of timing_errors, ms
  std::vector<double> timing_errors;  // seconds, detection - reference

  bool operator==(const EvalReport&) const = default;
};

// Throws DataError for fewer than two reference marks.
EvalReport evaluate(const GciLabels& reference, const GciLabels& detected, int sample_rate);

// Pools cycles and timing errors; throws DataError on an empty list.
EvalReport aggregate(std::span<const EvalReport> reports);

// key = value lines.
std::string report_text(const EvalReport& r);

std::string report_csv_header();
std::string report_csv_row(const std::string& utterance_id, const EvalReport& r);

}  // namespace gci

#endif  // GCI_METRICS_HPP_
