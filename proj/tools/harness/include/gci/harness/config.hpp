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

// Run configuration: an INI-style file ([section] headers, key = value
// lines, '#' or ';' comments) plus "section.key=value" overrides.  Every key
// has a default; unknown sections or keys are rejected.

#ifndef GCI_HARNESS_CONFIG_HPP_
#define GCI_HARNESS_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gci/framing.hpp"
#include "gci/inference.hpp"
#include "gci/model.hpp"
#include "gci/signal.hpp"
#include "gci/train.hpp"

namespace gci::harness {

// Noise condition: nullopt is clean speech.
using SnrLevel = std::optional<double>;

// "clean", or the SNR in dB.  Throws ConfigError outside [-10, 60] dB.
SnrLevel parse_snr(const std::string& s);
std::string snr_tag(const SnrLevel& snr);  // "clean", "snr10", "snr-5", "snr2.5"
std::string snr_label(const SnrLevel& snr);  // "clean", "10", "-5"

struct Condition {
  std::string name;
  SnrLevel train_snr;
  std::vector<SnrLevel> test_snrs = {std::nullopt};
  SplitSpec split;
};

struct RunConfig {
  std::filesystem::path output_dir = "gcinet_run";
  std::filesystem::path manifest;

  DeggPeakOptions degg;

  std::filesystem::path noise_file;  // empty: seeded white noise
  std::uint64_t noise_seed = 0;
  std::vector<SnrLevel> snrs = {std::nullopt};

  FramingConfig framing;
  ModelConfig model;  // frame sizes are filled in from framing at use
  std::uint64_t model_seed = 0;

  TrainConfig train;
  double neg_to_pos_ratio = kKeepAllNegatives;
  SnrLevel train_snr;

  SplitSpec split;
  ClusterConfig cluster;

  std::vector<Condition> conditions;

  // Model config with wd/wi/sample_rate taken from the framing.
  ModelConfig resolved_model(int sample_rate) const;
};

// Paths in the file (manifest, noise file) are relative to the file's
// directory; the output directory is relative to $GCINET_OUTPUT_ROOT when
// that is set, else to the working directory.
RunConfig load_run_config(const std::optional<std::filesystem::path>& file,
                          const std::vector<std::string>& overrides = {});

// Parses from text; `base_dir` anchors relative input paths.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir,
                           const std::vector<std::string>& overrides = {});

// Fully resolved config (absolute paths, every key).  Parsing it back gives
// an equal RunConfig.
std::string run_config_text(const RunConfig& cfg);

}  // namespace gci::harness

#endif  // GCI_HARNESS_CONFIG_HPP_
