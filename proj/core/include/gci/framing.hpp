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

// Supervised framing: every input frame is a detection window (at most one
// closure) with symmetric context on both sides.  Frames are taken at every
// `shift_samples` position where the whole frame fits inside the signal.
//
//   origin            origin+context      origin+context+wd        origin+wi
//     |---- context ----|------- wd -------|------ context ------|
//
// t_c = 1 iff a label falls in the detection window; t_r is then its
// offset from the window start.

#ifndef GCI_FRAMING_HPP_
#define GCI_FRAMING_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "gci/signal.hpp"

namespace gci {

struct FramingConfig {
  double wd_ms = 2.0;
  double context_ms = 5.0;
  std::int64_t shift_samples = 1;

  std::int64_t wd_samples(int sample_rate) const;
  std::int64_t context_samples(int sample_rate) const;
  std::int64_t wi_samples(int sample_rate) const;
  // Throws ConfigError for non-positive sizes or shift.
  void validate(int sample_rate) const;

  bool operator==(const FramingConfig&) const = default;
};

struct FrameView {
  std::span<const double> frame;
  std::uint8_t t_c;
  double t_r;
  std::int64_t origin;
};

// Records stored column-wise; frames are contiguous rows of wi samples.
class FrameDataset {
 public:
  FrameDataset() = default;
  FrameDataset(FramingConfig config, int sample_rate);

  const FramingConfig& config() const { return config_; }
  int sample_rate() const { return sample_rate_; }
  std::size_t frame_length() const { return frame_length_; }
  std::size_t size() const { return t_c_.size(); }
  bool empty() const { return t_c_.empty(); }
  std::size_t positives() const;

  FrameView record(std::size_t i) const;
  std::span<const double> frame(std::size_t i) const {
    return std::span<const double>(frames_).subspan(i * frame_length_, frame_length_);
  }
  std::uint8_t t_c(std::size_t i) const { return t_c_[i]; }
  double t_r(std::size_t i) const { return t_r_[i]; }
  std::int64_t origin(std::size_t i) const { return origin_[i]; }

  void push_back(std::span<const double> frame, std::uint8_t t_c, double t_r,
                 std::int64_t origin);
  void reserve(std::size_t n);
  // Appends every record of `other`; configurations must agree.
  void append(const FrameDataset& other);
  // Dataset holding the listed records, in the given order.
  FrameDataset subset(std::span<const std::size_t> indices) const;

  bool operator==(const FrameDataset&) const = default;

 private:
  FramingConfig config_;
  int sample_rate_ = kDefaultSampleRate;
  std::size_t frame_length_ = 0;
  std::vector<double> frames_;
  std::vector<std::uint8_t> t_c_;
  std::vector<double> t_r_;
  std::vector<std::int64_t> origin_;
};

// Throws DataError if the signal is shorter than one frame, a label is out
// of range, or two labels share one detection window.
FrameDataset make_frames(const Waveform& w, const GciLabels& labels,
                         const FramingConfig& cfg = {});

inline constexpr double kKeepAllNegatives = std::numeric_limits<double>::infinity();

// Keeps every positive and a seeded uniform sample of
// floor(ratio * positives) negatives, preserving record order.
FrameDataset class_balance_subsample(const FrameDataset& ds, double neg_to_pos_ratio,
                                     std::uint64_t seed);

// Dataset cache: "GCIFRAME" magic, u32 version, config, records, CRC32.
void save_dataset(const FrameDataset& ds, const std::filesystem::path& path);
FrameDataset load_dataset(const std::filesystem::path& path);

// --- train/test partitioning -------------------------------------------

struct UtteranceRef {
  std::string id;
  std::string speaker;
  std::string dataset;
};

enum class SplitMode { kUtterance, kSpeaker, kDataset };

SplitMode parse_split_mode(const std::string& s);
std::string to_string(SplitMode mode);

struct SplitSpec {
  SplitMode mode = SplitMode::kUtterance;
  double train_fraction = 0.10;
  std::uint64_t seed = 0;
  // Speaker or dataset ids forming the training side.  When empty, groups
  // are drawn at random to cover train_fraction of the groups.
  std::vector<std::string> train_groups;
  // Optional explicit test groups; empty means every group not in training.
  std::vector<std::string> test_groups;
};

struct Split {
  std::vector<std::size_t> train;  // indices into the utterance list
  std::vector<std::size_t> test;
};

Split train_test_split(std::span<const UtteranceRef> utterances, const SplitSpec& spec);

}  // namespace gci

#endif  // GCI_FRAMING_HPP_
