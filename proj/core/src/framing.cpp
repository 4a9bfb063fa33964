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

#include "gci/framing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "gci/binary_io.hpp"
#include "gci/error.hpp"

namespace gci {

std::int64_t FramingConfig::wd_samples(int sample_rate) const {
  return ms_to_samples(wd_ms, sample_rate);
}

std::int64_t FramingConfig::context_samples(int sample_rate) const {
  return ms_to_samples(context_ms, sample_rate);
}

std::int64_t FramingConfig::wi_samples(int sample_rate) const {
  return wd_samples(sample_rate) + 2 * context_samples(sample_rate);
}

void FramingConfig::validate(int sample_rate) const {
  if (sample_rate <= 0) throw ConfigError("framing: sample rate must be positive");
  if (wd_samples(sample_rate) <= 0) {
    throw ConfigError("framing: detection window of " + std::to_string(wd_ms) +
                      " ms is empty at " + std::to_string(sample_rate) + " Hz");
  }
  if (context_samples(sample_rate) < 0) throw ConfigError("framing: negative context");
  if (shift_samples < 1) throw ConfigError("framing: shift must be >= 1 sample");
}

FrameDataset::FrameDataset(FramingConfig config, int sample_rate)
    : config_(config),
      sample_rate_(sample_rate),
      frame_length_(static_cast<std::size_t>(config.wi_samples(sample_rate))) {
  config_.validate(sample_rate);
}

std::size_t FrameDataset::positives() const {
  return static_cast<std::size_t>(std::count(t_c_.begin(), t_c_.end(), 1));
}

FrameView FrameDataset::record(std::size_t i) const {
  return {frame(i), t_c_[i], t_r_[i], origin_[i]};
}

void FrameDataset::push_back(std::span<const double> frame, std::uint8_t t_c,
                             double t_r, std::int64_t origin) {
  if (frame.size() != frame_length_) {
    throw DataError("frame dataset: frame of length " + std::to_string(frame.size()) +
                    ", expected " + std::to_string(frame_length_));
  }
  frames_.insert(frames_.end(), frame.begin(), frame.end());
  t_c_.push_back(t_c);
  t_r_.push_back(t_r);
  origin_.push_back(origin);
}

void FrameDataset::reserve(std::size_t n) {
  frames_.reserve(n * frame_length_);
  t_c_.reserve(n);
  t_r_.reserve(n);
  origin_.reserve(n);
}

void FrameDataset::append(const FrameDataset& other) {
  if (other.config_ != config_ || other.sample_rate_ != sample_rate_) {
    throw ConfigError("frame dataset: cannot append datasets with different framing");
  }
  frames_.insert(frames_.end(), other.frames_.begin(), other.frames_.end());
  t_c_.insert(t_c_.end(), other.t_c_.begin(), other.t_c_.end());
  t_r_.insert(t_r_.end(), other.t_r_.begin(), other.t_r_.end());
  origin_.insert(origin_.end(), other.origin_.begin(), other.origin_.end());
}

FrameDataset FrameDataset::subset(std::span<const std::size_t> indices) const {
  FrameDataset out(config_, sample_rate_);
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(frame(i), t_c_[i], t_r_[i], origin_[i]);
  return out;
}

FrameDataset make_frames(const Waveform& w, const GciLabels& labels,
                         const FramingConfig& cfg) {
  require_valid(w, "make_frames");
  cfg.validate(w.sample_rate);
  const std::int64_t wd = cfg.wd_samples(w.sample_rate);
  const std::int64_t ctx = cfg.context_samples(w.sample_rate);
  const std::int64_t wi = cfg.wi_samples(w.sample_rate);
  const auto n = static_cast<std::int64_t>(w.size());
  if (n < wi) {
    throw DataError("make_frames: signal of " + std::to_string(n) +
                    " samples is shorter than one " + std::to_string(wi) +
                    "-sample frame");
  }
  labels.require_within(w.size());

  FrameDataset ds(cfg, w.sample_rate);
  ds.reserve(static_cast<std::size_t>((n - wi) / cfg.shift_samples + 1));
  const auto& pos = labels.positions();
  std::size_t first = 0;  // first label not before the current window
  for (std::int64_t origin = 0; origin + wi <= n; origin += cfg.shift_samples) {
    const std::int64_t lo = origin + ctx, hi = lo + wd;
    while (first < pos.size() && pos[first] < lo) ++first;
    std::uint8_t t_c = 0;
    double t_r = 0.0;
    if (first < pos.size() && pos[first] < hi) {
      if (first + 1 < pos.size() && pos[first + 1] < hi) {
        throw DataError("make_frames: labels " + std::to_string(pos[first]) + " and " +
                        std::to_string(pos[first + 1]) +
                        " fall in one detection window; ground truth is corrupt");
      }
      t_c = 1;
      t_r = static_cast<double>(pos[first] - lo);
    }
    ds.push_back(std::span<const double>(w.samples).subspan(
                     static_cast<std::size_t>(origin), static_cast<std::size_t>(wi)),
                 t_c, t_r, origin);
  }
  return ds;
}

FrameDataset class_balance_subsample(const FrameDataset& ds, double ratio,
                                     std::uint64_t seed) {
  if (std::isinf(ratio) && ratio > 0) return ds;
  if (!(ratio >= 0.0)) throw ConfigError("class_balance_subsample: ratio must be >= 0");
  const std::size_t n_pos = ds.positives();
  if (n_pos == 0) {
    throw DataError("class_balance_subsample: no positive records to balance against");
  }
  std::vector<std::size_t> negatives;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.t_c(i) == 0) negatives.push_back(i);
  }
  const auto want = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n_pos)));
  std::vector<std::uint8_t> keep(ds.size(), 0);
  for (std::size_t i = 0; i < ds.size(); ++i) keep[i] = ds.t_c(i);
  if (want >= negatives.size()) {
    for (std::size_t i : negatives) keep[i] = 1;
  } else {
    // Partial Fisher-Yates with an explicit uniform draw, so the selection
    // does not depend on the standard library's shuffle.
    std::mt19937_64 rng(seed);
    for (std::size_t k = 0; k < want; ++k) {
      const std::size_t j = k + static_cast<std::size_t>(rng() % (negatives.size() - k));
      std::swap(negatives[k], negatives[j]);
      keep[negatives[k]] = 1;
    }
  }
  std::vector<std::size_t> indices;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (keep[i]) indices.push_back(i);
  }
  return ds.subset(indices);
}

namespace {

constexpr char kDatasetMagic[] = "GCIFRAME";
constexpr std::uint32_t kDatasetVersion = 1;

}  // namespace

// Layout (little-endian):
//   char[8] "GCIFRAME" | u32 version | f64 wd_ms | f64 context_ms |
//   i64 shift | i32 sample_rate (as u32) | u64 frame_length | u64 count |
//   count x { i64 origin | u8 t_c | f64 t_r | f64[frame_length] } |
//   u32 crc32 of everything before it
void save_dataset(const FrameDataset& ds, const std::filesystem::path& path) {
  bin::Writer w;
  w.bytes(std::string_view(kDatasetMagic, 8));
  w.u32(kDatasetVersion);
  w.f64(ds.config().wd_ms);
  w.f64(ds.config().context_ms);
  w.i64(ds.config().shift_samples);
  w.u32(static_cast<std::uint32_t>(ds.sample_rate()));
  w.u64(ds.frame_length());
  w.u64(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    w.i64(ds.origin(i));
    w.u8(ds.t_c(i));
    w.f64(ds.t_r(i));
    w.f64s(ds.frame(i));
  }
  w.u32(bin::crc32(w.buffer()));
  bin::write_file(path, w.buffer());
}

FrameDataset load_dataset(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = bin::read_file(path);
  if (bytes.size() < 12) throw FormatError(path.string() + ": not a dataset cache");
  bin::Reader r(bytes);
  if (r.bytes(8) != std::string_view(kDatasetMagic, 8)) {
    throw FormatError(path.string() + ": bad magic, not a dataset cache");
  }
  const std::uint32_t version = r.u32();
  if (version != kDatasetVersion) {
    throw FormatError(path.string() + ": dataset cache version " + std::to_string(version) +
                      ", this build reads version " + std::to_string(kDatasetVersion));
  }
  const std::span<const std::uint8_t> body(bytes.data(), bytes.size() - 4);
  bin::Reader tail(std::span<const std::uint8_t>(bytes).last(4));
  if (bin::crc32(body) != tail.u32()) {
    throw FormatError(path.string() + ": checksum mismatch (corrupt or truncated)");
  }
  FramingConfig cfg;
  cfg.wd_ms = r.f64();
  cfg.context_ms = r.f64();
  cfg.shift_samples = r.i64();
  const auto rate = static_cast<int>(r.u32());
  const std::uint64_t frame_length = r.u64();
  const std::uint64_t count = r.u64();
  FrameDataset ds(cfg, rate);
  if (frame_length != ds.frame_length()) {
    throw FormatError(path.string() + ": frame length disagrees with framing config");
  }
  ds.reserve(count);
  std::vector<double> frame(frame_length);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::int64_t origin = r.i64();
    const std::uint8_t t_c = r.u8();
    const double t_r = r.f64();
    r.f64s(frame);
    ds.push_back(frame, t_c, t_r, origin);
  }
  return ds;
}

SplitMode parse_split_mode(const std::string& s) {
  if (s == "utterance") return SplitMode::kUtterance;
  if (s == "speaker") return SplitMode::kSpeaker;
  if (s == "dataset") return SplitMode::kDataset;
  throw ConfigError("unknown split mode '" + s + "' (utterance, speaker, dataset)");
}

std::string to_string(SplitMode mode) {
  switch (mode) {
    case SplitMode::kUtterance: return "utterance";
    case SplitMode::kSpeaker: return "speaker";
    case SplitMode::kDataset: return "dataset";
  }
  return "?";
}

namespace {

void seeded_shuffle(std::vector<std::size_t>& v, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

std::size_t train_count(double fraction, std::size_t n) {
  auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  k = std::max<std::size_t>(k, 1);
  if (n >= 2) k = std::min(k, n - 1);
  return k;
}

}  // namespace

Split train_test_split(std::span<const UtteranceRef> utterances, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw ConfigError("train_test_split: train fraction " +
                      std::to_string(spec.train_fraction) + " outside (0, 1)");
  }
  if (utterances.empty()) throw DataError("train_test_split: no utterances");

  Split split;
  const std::size_t n = utterances.size();
  if (spec.mode == SplitMode::kUtterance) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    seeded_shuffle(order, spec.seed);
    const std::size_t k = train_count(spec.train_fraction, n);
    split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(k), order.end());
  } else {
    auto group_of = [&](std::size_t i) -> const std::string& {
      return spec.mode == SplitMode::kSpeaker ? utterances[i].speaker
                                              : utterances[i].dataset;
    };
    std::set<std::string> groups;
    for (std::size_t i = 0; i < n; ++i) groups.insert(group_of(i));
    auto check_known = [&](const std::vector<std::string>& names) {
      for (const std::string& g : names) {
        if (!groups.count(g)) {
          throw DataError("train_test_split: unknown " + to_string(spec.mode) + " '" + g + "'");
        }
      }
    };
    check_known(spec.train_groups);
    check_known(spec.test_groups);

    std::set<std::string> train_groups(spec.train_groups.begin(), spec.train_groups.end());
    if (train_groups.empty()) {
      std::vector<std::string> names(groups.begin(), groups.end());
      std::vector<std::size_t> order(names.size());
      std::iota(order.begin(), order.end(), 0);
      seeded_shuffle(order, spec.seed);
      const std::size_t k = train_count(spec.train_fraction, names.size());
      for (std::size_t i = 0; i < k; ++i) train_groups.insert(names[order[i]]);
    }
    const std::set<std::string> test_groups(spec.test_groups.begin(), spec.test_groups.end());
    for (std::size_t i = 0; i < n; ++i) {
      const std::string& g = group_of(i);
      if (train_groups.count(g)) {
        split.train.push_back(i);
      } else if (test_groups.empty() || test_groups.count(g)) {
        split.test.push_back(i);
      }
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

}  // namespace gci
