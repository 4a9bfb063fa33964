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

// Impulse-train source / resonator-cascade filter synthesis of voiced
// speech with exactly known epochs.

#ifndef GCI_SYNTH_HPP_
#define GCI_SYNTH_HPP_

#include <cstdint>
#include <vector>

#include "gci/signal.hpp"

namespace gci {

struct Resonator {
  double center_hz = 500.0;
  double bandwidth_hz = 80.0;
};

struct SynthSpec {
  double duration_s = 1.0;
  // Pitch periods (ms) at evenly spaced control points spanning the
  // utterance, linearly interpolated.  A single entry is a constant pitch.
  std::vector<double> pitch_periods_ms = {10.0};
  std::vector<Resonator> resonators = {
      {500.0, 80.0}, {1500.0, 100.0}, {2500.0, 120.0}, {3500.0, 150.0}};
  double noise_floor = 0.0;  // std of additive white noise
  std::uint64_t seed = 0;
};

struct SynthResult {
  Waveform speech;
  GciLabels epochs;
};

// Throws DataError for a pitch period outside [2, 20] ms or an unstable
// (non-positive bandwidth, or centre outside (0, fs/2)) resonator.
void validate(const SynthSpec& spec, int sample_rate);

// Epoch positions: the first at sample 0, then each advanced by the pitch
// period evaluated at the current epoch time, rounded to whole samples.
GciLabels synth_epochs(const SynthSpec& spec, int sample_rate);

SynthResult synth_voiced(const SynthSpec& spec, int sample_rate = kDefaultSampleRate);

// Unit-DC-gain two-pole section: y[n] = a x[n] + b y[n-1] + c y[n-2].
struct ResonatorCoefficients {
  double a, b, c;
};
ResonatorCoefficients resonator_coefficients(const Resonator& r, int sample_rate);

// Runs the resonator cascade over `x` in place.
void apply_resonators(std::vector<double>& x, const std::vector<Resonator>& resonators,
                      int sample_rate);

// A sawtooth electroglottogram: within each cycle the contact signal ramps
// up linearly and drops abruptly at the next epoch.
Waveform synth_egg(const GciLabels& epochs, std::size_t length,
                   int sample_rate = kDefaultSampleRate);

}  // namespace gci

#endif  // GCI_SYNTH_HPP_
