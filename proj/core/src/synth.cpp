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

#include "gci/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "gci/error.hpp"

namespace gci {

void validate(const SynthSpec& spec, int sample_rate) {
  if (sample_rate <= 0) throw DataError("synth: sample rate must be positive");
  if (!(spec.duration_s > 0.0)) throw DataError("synth: duration must be positive");
  if (spec.pitch_periods_ms.empty()) throw DataError("synth: empty pitch contour");
  for (double p : spec.pitch_periods_ms) {
    if (!(p >= 2.0 && p <= 20.0)) {
      throw DataError("synth: pitch period " + std::to_string(p) +
                      " ms outside [2, 20] ms");
    }
  }
  for (const Resonator& r : spec.resonators) {
    if (!(r.bandwidth_hz > 0.0) || !(r.center_hz > 0.0) ||
        !(r.center_hz < sample_rate / 2.0)) {
      throw DataError("synth: unstable resonator (centre " +
                      std::to_string(r.center_hz) + " Hz, bandwidth " +
                      std::to_string(r.bandwidth_hz) + " Hz)");
    }
  }
  if (spec.noise_floor < 0.0) throw DataError("synth: negative noise floor");
}

namespace {

double period_at(const std::vector<double>& contour, double fraction) {
  if (contour.size() == 1) return contour.front();
  const double pos = std::clamp(fraction, 0.0, 1.0) * (contour.size() - 1);
  const std::size_t i = std::min(static_cast<std::size_t>(pos), contour.size() - 2);
  const double t = pos - static_cast<double>(i);
  return contour[i] + t * (contour[i + 1] - contour[i]);
}

}  // namespace

GciLabels synth_epochs(const SynthSpec& spec, int sample_rate) {
  validate(spec, sample_rate);
  const auto length = static_cast<std::int64_t>(std::llround(spec.duration_s * sample_rate));
  std::vector<std::int64_t> epochs;
  double t = 0.0;
  while (true) {
    const std::int64_t pos = std::llround(t);
    if (pos >= length) break;
    epochs.push_back(pos);
    const double period_ms = period_at(spec.pitch_periods_ms, t / length);
    t += period_ms * sample_rate / 1000.0;
  }
  return GciLabels(std::move(epochs));
}

ResonatorCoefficients resonator_coefficients(const Resonator& r, int sample_rate) {
  const double radius = std::exp(-std::numbers::pi * r.bandwidth_hz / sample_rate);
  const double b = 2.0 * radius * std::cos(2.0 * std::numbers::pi * r.center_hz / sample_rate);
  const double c = -radius * radius;
  return {1.0 - b - c, b, c};
}

void apply_resonators(std::vector<double>& x, const std::vector<Resonator>& resonators,
                      int sample_rate) {
  for (const Resonator& r : resonators) {
    const ResonatorCoefficients k = resonator_coefficients(r, sample_rate);
    double y1 = 0.0, y2 = 0.0;
    for (double& v : x) {
      const double y = k.a * v + k.b * y1 + k.c * y2;
      y2 = y1;
      y1 = y;
      v = y;
    }
  }
}

SynthResult synth_voiced(const SynthSpec& spec, int sample_rate) {
  SynthResult out;
  out.epochs = synth_epochs(spec, sample_rate);
  const auto length = static_cast<std::size_t>(std::llround(spec.duration_s * sample_rate));
  out.speech.sample_rate = sample_rate;
  out.speech.samples.assign(length, 0.0);
  for (std::int64_t e : out.epochs) out.speech.samples[static_cast<std::size_t>(e)] = 1.0;
  apply_resonators(out.speech.samples, spec.resonators, sample_rate);
  if (spec.noise_floor > 0.0) {
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, spec.noise_floor);
    for (double& v : out.speech.samples) v += normal(rng);
  }
  return out;
}

Waveform synth_egg(const GciLabels& epochs, std::size_t length, int sample_rate) {
  epochs.require_within(length);
  Waveform egg;
  egg.sample_rate = sample_rate;
  egg.samples.assign(length, 0.0);
  // The drop from a cycle's peak to the next cycle's first sample lands on
  // each epoch.
  for (std::size_t k = 0; k < epochs.size(); ++k) {
    const auto start = static_cast<std::size_t>(epochs[k]);
    const std::size_t stop =
        k + 1 < epochs.size() ? static_cast<std::size_t>(epochs[k + 1]) : length;
    const double span = static_cast<double>(stop - start);
    for (std::size_t n = start; n < stop; ++n) {
      egg.samples[n] = 0.8 * static_cast<double>(n - start + 1) / span;
    }
  }
  return egg;
}

}  // namespace gci
