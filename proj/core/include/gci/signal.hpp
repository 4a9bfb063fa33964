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

// Core signal carriers and the signal-domain operations used to build
// ground truth: differentiation, dEGG peak picking and SNR-controlled noise
// mixing.

#ifndef GCI_SIGNAL_HPP_
#define GCI_SIGNAL_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <vector>

namespace gci {

inline constexpr int kDefaultSampleRate = 16000;

struct Waveform {
  std::vector<double> samples;
  int sample_rate = kDefaultSampleRate;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
  bool operator==(const Waveform&) const = default;
};

// Throws DataError unless sample_rate > 0 and the signal is non-empty.
void require_valid(const Waveform& w, const char* what);

// round(ms * sample_rate / 1000).
std::int64_t ms_to_samples(double ms, int sample_rate);

// Strictly increasing, non-negative sample indices of glottal closures.
class GciLabels {
 public:
  GciLabels() = default;
  explicit GciLabels(std::vector<std::int64_t> positions);
  GciLabels(std::initializer_list<std::int64_t> positions)
      : GciLabels(std::vector<std::int64_t>(positions)) {}

  const std::vector<std::int64_t>& positions() const { return positions_; }
  std::size_t size() const { return positions_.size(); }
  bool empty() const { return positions_.empty(); }
  std::int64_t operator[](std::size_t i) const { return positions_[i]; }
  auto begin() const { return positions_.begin(); }
  auto end() const { return positions_.end(); }

  // Throws DataError if any label is >= signal_length.
  void require_within(std::size_t signal_length) const;
  // Smallest gap between consecutive labels (0 when fewer than two).
  std::int64_t min_spacing() const;

  bool operator==(const GciLabels&) const = default;

 private:
  std::vector<std::int64_t> positions_;
};

// output[n] = input[n] - input[n-1], output[0] = 0.
Waveform differentiate(const Waveform& w);

struct DeggPeakOptions {
  double min_period_ms = 2.0;
  // Minimum valley depth as a fraction of the deepest valley.
  double prominence_frac = 0.3;
  // Negate the EGG first (for recordings with the opposite polarity).
  bool invert_polarity = false;
};

// Ground-truth closures from an EGG channel: local minima of the dEGG, kept
// when deeper than prominence_frac times the deepest one, thinned greedily
// (deepest first) so retained peaks are at least min_period_ms apart.
GciLabels extract_gci_from_degg(const Waveform& egg,
                                const DeggPeakOptions& options = {});

struct NoiseMix {
  Waveform mixed;
  std::vector<double> scaled_noise;  // the added component
  double gain = 0.0;                 // applied to the noise segment
  std::size_t noise_offset = 0;      // circular start index in the noise
};

// clean + g * noise_segment with g set so that the full-utterance power
// ratio equals snr_db.  The noise segment starts at a seeded circular
// offset and wraps around when the noise is shorter than the speech.
NoiseMix mix_noise_components(const Waveform& clean, const Waveform& noise,
                              double snr_db, std::uint64_t seed);
Waveform mix_noise(const Waveform& clean, const Waveform& noise, double snr_db,
                   std::uint64_t seed);

double signal_power(const std::vector<double>& x);
// 10 log10(P(signal) / P(noise)).
double snr_db(const std::vector<double>& signal, const std::vector<double>& noise);

// Gaussian white noise of unit variance.
Waveform white_noise(std::size_t length, int sample_rate, std::uint64_t seed);

// Label files: UTF-8 text, one decimal sample index per line.
GciLabels read_labels(const std::filesystem::path& path);
void write_labels(const GciLabels& labels, const std::filesystem::path& path);

}  // namespace gci

#endif  // GCI_SIGNAL_HPP_
