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

// Candidate generation and weighted-histogram clustering.
//
// Every frame origin (step inference_shift) whose y_c reaches the threshold
// yields a candidate at origin + context + y_r weighted by y_c.  Candidates
// are binned by floor(location) / B; maximal runs of non-empty bins form
// groups, and each group becomes one mark at the probability-weighted mean
// location, rounded to a sample.

#ifndef GCI_INFERENCE_HPP_
#define GCI_INFERENCE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "gci/model.hpp"
#include "gci/signal.hpp"

namespace gci {

struct CandidateGci {
  double location = 0.0;  // absolute sample position
  double probability = 0.0;
  bool operator==(const CandidateGci&) const = default;
};

struct ClusterConfig {
  std::size_t bin_size = 5;
  double threshold = 0.5;
  std::int64_t inference_shift = 1;
  // Drop groups whose total probability mass is below min_group_mass.
  bool prune_low_mass = false;
  double min_group_mass = 1.0;

  // Throws ConfigError unless bin_size >= 1, 0 < threshold < 1, shift >= 1.
  void validate() const;
};

enum class InferencePath {
  kAuto,         // whole-signal when the model has no per-frame scaling
  kFrameWise,    // one forward pass per frame
  kWholeSignal,  // shared feature maps over the full signal
};

// Network outputs for frame origins 0, shift, 2 shift, ...; throws DataError
// if the signal is shorter than one frame.  The whole-signal path requires
// InputScale::kNone (ConfigError otherwise) and gives the same numbers as
// the frame-wise path: every output is the same sum in the same order.
Outputs score_frames(const Model& model, const Waveform& w, std::int64_t shift = 1,
                     InferencePath path = InferencePath::kAuto);

std::vector<CandidateGci> predict_candidates(const Model& model, const Waveform& w,
                                             const ClusterConfig& cfg,
                                             InferencePath path = InferencePath::kAuto);

// Probability mass per bin over [0, signal_length).  Candidates outside the
// signal are rejected with DataError.
std::vector<double> candidate_histogram(std::span<const CandidateGci> cands,
                                        std::size_t bin_size, std::size_t signal_length);

GciLabels cluster_candidates(std::span<const CandidateGci> cands, const ClusterConfig& cfg,
                             std::size_t signal_length);

GciLabels detect(const Model& model, const Waveform& w, const ClusterConfig& cfg,
                 std::vector<CandidateGci>* candidates_out = nullptr);

// "location probability" per line.
void write_candidates(std::span<const CandidateGci> cands, const std::filesystem::path& path);

}  // namespace gci

#endif  // GCI_INFERENCE_HPP_
