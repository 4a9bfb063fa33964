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

#include "gci/signal.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "gci/error.hpp"

namespace gci {

void require_valid(const Waveform& w, const char* what) {
  if (w.sample_rate <= 0) {
    throw DataError(std::string(what) + ": sample rate must be positive, got " +
                    std::to_string(w.sample_rate));
  }
  if (w.samples.empty()) throw DataError(std::string(what) + ": empty signal");
}

std::int64_t ms_to_samples(double ms, int sample_rate) {
  return std::llround(ms * sample_rate / 1000.0);
}

GciLabels::GciLabels(std::vector<std::int64_t> positions)
    : positions_(std::move(positions)) {
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    if (positions_[i] < 0) {
      throw DataError("labels: negative sample index " +
                      std::to_string(positions_[i]));
    }
    if (i > 0 && positions_[i] <= positions_[i - 1]) {
      throw DataError("labels: not strictly increasing at entry " +
                      std::to_string(i) + " (" +
                      std::to_string(positions_[i - 1]) + " then " +
                      std::to_string(positions_[i]) + ")");
    }
  }
}

void GciLabels::require_within(std::size_t signal_length) const {
  if (!positions_.empty() &&
      positions_.back() >= static_cast<std::int64_t>(signal_length)) {
    throw DataError("labels: index " + std::to_string(positions_.back()) +
                    " beyond signal of length " + std::to_string(signal_length));
  }
}

std::int64_t GciLabels::min_spacing() const {
  std::int64_t best = 0;
  for (std::size_t i = 1; i < positions_.size(); ++i) {
    const std::int64_t gap = positions_[i] - positions_[i - 1];
    if (i == 1 || gap < best) best = gap;
  }
  return best;
}

Waveform differentiate(const Waveform& w) {
  if (w.samples.size() < 2) {
    throw DataError("differentiate: need at least 2 samples, got " +
                    std::to_string(w.samples.size()));
  }
  Waveform d;
  d.sample_rate = w.sample_rate;
  d.samples.resize(w.samples.size());
  d.samples[0] = 0.0;
  for (std::size_t n = 1; n < w.samples.size(); ++n) {
    d.samples[n] = w.samples[n] - w.samples[n - 1];
  }
  return d;
}

GciLabels extract_gci_from_degg(const Waveform& egg,
                                const DeggPeakOptions& options) {
  require_valid(egg, "extract_gci_from_degg");
  Waveform source = egg;
  if (options.invert_polarity) {
    for (double& v : source.samples) v = -v;
  }
  const std::vector<double> d = differentiate(source).samples;
  const std::size_t n = d.size();

  struct Valley {
    std::int64_t index;
    double depth;
  };
  std::vector<Valley> valleys;
  double deepest = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const bool falls_into = d[i] < d[i - 1];
    const bool rises_after = (i + 1 == n) || d[i] <= d[i + 1];
    if (d[i] < 0.0 && falls_into && rises_after) {
      valleys.push_back({static_cast<std::int64_t>(i), -d[i]});
      deepest = std::max(deepest, -d[i]);
    }
  }
  const double floor = options.prominence_frac * deepest;
  std::erase_if(valleys, [&](const Valley& v) { return !(v.depth > floor); });

  std::stable_sort(valleys.begin(), valleys.end(),
                   [](const Valley& a, const Valley& b) { return a.depth > b.depth; });
  const std::int64_t spacing =
      std::max<std::int64_t>(1, ms_to_samples(options.min_period_ms, egg.sample_rate));
  std::set<std::int64_t> kept;
  for (const Valley& v : valleys) {
    auto next = kept.lower_bound(v.index);
    if (next != kept.end() && *next - v.index < spacing) continue;
    if (next != kept.begin() && v.index - *std::prev(next) < spacing) continue;
    kept.insert(v.index);
  }
  return GciLabels(std::vector<std::int64_t>(kept.begin(), kept.end()));
}

double signal_power(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

double snr_db(const std::vector<double>& signal, const std::vector<double>& noise) {
  return 10.0 * std::log10(signal_power(signal) / signal_power(noise));
}

NoiseMix mix_noise_components(const Waveform& clean, const Waveform& noise,
                              double snr, std::uint64_t seed) {
  require_valid(clean, "mix_noise (speech)");
  require_valid(noise, "mix_noise (noise)");
  if (clean.sample_rate != noise.sample_rate) {
    throw DataError("mix_noise: sample rate mismatch (speech " +
                    std::to_string(clean.sample_rate) + " Hz, noise " +
                    std::to_string(noise.sample_rate) + " Hz)");
  }
  const double p_clean = signal_power(clean.samples);
  if (!(p_clean > 0.0)) throw DataError("mix_noise: speech has zero power");

  std::mt19937_64 rng(seed);
  const std::size_t len = clean.size(), noise_len = noise.size();
  NoiseMix out;
  out.noise_offset = static_cast<std::size_t>(rng() % noise_len);
  out.scaled_noise.resize(len);
  for (std::size_t i = 0; i < len; ++i) {
    out.scaled_noise[i] = noise.samples[(out.noise_offset + i) % noise_len];
  }
  const double p_noise = signal_power(out.scaled_noise);
  if (!(p_noise > 0.0)) throw DataError("mix_noise: noise segment has zero power");

  out.gain = std::sqrt(p_clean / (p_noise * std::pow(10.0, snr / 10.0)));
  out.mixed.sample_rate = clean.sample_rate;
  out.mixed.samples.resize(len);
  for (std::size_t i = 0; i < len; ++i) {
    out.scaled_noise[i] *= out.gain;
    out.mixed.samples[i] = clean.samples[i] + out.scaled_noise[i];
  }
  return out;
}

Waveform mix_noise(const Waveform& clean, const Waveform& noise, double snr,
                   std::uint64_t seed) {
  return mix_noise_components(clean, noise, snr, seed).mixed;
}

Waveform white_noise(std::size_t length, int sample_rate, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.resize(length);
  for (double& v : w.samples) v = normal(rng);
  return w;
}

GciLabels read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open label file " + path.string());
  std::vector<std::int64_t> positions;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::int64_t value = 0;
    const char* first = line.data();
    const char* last = line.data() + line.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": not an integer sample index: '" + line + "'");
    }
    positions.push_back(value);
  }
  try {
    return GciLabels(std::move(positions));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_labels(const GciLabels& labels, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write label file " + path.string());
  for (std::int64_t p : labels) out << p << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace gci
