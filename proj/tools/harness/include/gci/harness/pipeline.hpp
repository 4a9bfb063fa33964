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

// The command pipeline: synthesize, prepare, train, detect, evaluate and
// the experiment driver that chains them per condition.

#ifndef GCI_HARNESS_PIPELINE_HPP_
#define GCI_HARNESS_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gci/harness/config.hpp"
#include "gci/harness/manifest.hpp"
#include "gci/inference.hpp"
#include "gci/metrics.hpp"
#include "gci/model.hpp"
#include "gci/train.hpp"

namespace gci::harness {

// --- synthetic corpus -------------------------------------------------------

struct SynthCorpusSpec {
  std::size_t utterances = 10;
  double duration_s = 3.0;
  // Utterance k sweeps its pitch period linearly between these bounds,
  // upward for even k and downward for odd k.
  double min_period_ms = 4.0;
  double max_period_ms = 16.0;
  std::size_t speakers = 2;
  // Speaker s scales every resonance by 1 + speaker_formant_step * s; each
  // utterance then jitters centres and bandwidths by up to +/- formant_jitter.
  double speaker_formant_step = 0.1;
  double formant_jitter = 0.1;
  double noise_floor = 0.0;
  bool write_egg = true;
  std::uint64_t seed = 7;
  std::string dataset = "synth";
  int sample_rate = kDefaultSampleRate;
};

// Writes wav/<id>.wav, labels/<id>.txt, egg/<id>.wav (optional) and
// manifest.csv under out_dir.  Deterministic in the spec.
std::vector<ManifestEntry> synth_corpus(const SynthCorpusSpec& spec,
                                        const std::filesystem::path& out_dir);

// --- utterances and noise ---------------------------------------------------

struct Utterance {
  ManifestEntry entry;
  Waveform clean;
  GciLabels reference;
};

// Reference GCIs come from the label file when present, else from the EGG.
Utterance load_utterance(const ManifestEntry& entry, const DeggPeakOptions& degg);

// Speech for one noise condition.  Noise is added to the speech only; the
// references stay those of the clean signal.
class NoiseSource {
 public:
  explicit NoiseSource(const RunConfig& cfg);
  Waveform apply(const Utterance& u, const SnrLevel& snr) const;

 private:
  std::uint64_t seed_;
  bool white_;
  Waveform noise_;
};

// --- prepare ---------------------------------------------------------------

// Layout under root: labels/<id>.txt, <snr tag>/<id>.gcf dataset caches,
// <snr tag>/<id>.wav noisy speech (float) and a fingerprint per tag.  Tags
// whose fingerprint matches are reused.
void prepare(const RunConfig& cfg, const std::vector<ManifestEntry>& entries,
             const std::filesystem::path& root);

std::filesystem::path cache_path(const std::filesystem::path& root, const SnrLevel& snr,
                                 const std::string& id);

// --- train -----------------------------------------------------------------

struct TrainOutcome {
  Model model;
  std::vector<EpochStats> epochs;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Splits, loads the training caches, trains and writes model.ckpt,
// loss.csv, split.csv and resolved.ini into out_dir.
TrainOutcome run_training(const RunConfig& cfg, const std::vector<ManifestEntry>& entries,
                          const std::filesystem::path& prepared_root, const SnrLevel& snr,
                          const SplitSpec& split, const std::filesystem::path& out_dir);

// --- detect / evaluate -------------------------------------------------------

// Detects on every listed utterance under one noise condition.  Writes
// <out_dir>/<id>.txt per utterance and returns per-utterance reports (in
// list order) for those with at least two reference marks.
struct DetectionRun {
  std::vector<std::string> ids;
  std::vector<EvalReport> reports;
  EvalReport pooled;
};
DetectionRun detect_and_evaluate(const RunConfig& cfg, const Model& model,
                                 const std::vector<ManifestEntry>& entries,
                                 const std::vector<std::size_t>& which, const SnrLevel& snr,
                                 const std::filesystem::path& out_dir);

// CSV with one row per utterance and a final POOLED row.
std::string evaluation_csv(const DetectionRun& run);

// Pairs label files by stem.  Each argument is a file or a directory of
// .txt files; unmatched names are a DataError.
DetectionRun evaluate_files(const std::filesystem::path& reference,
                            const std::filesystem::path& detected, int sample_rate);

// --- experiments -------------------------------------------------------------

struct ResultRow {
  std::string condition;
  std::string train_snr;
  std::string test_snr;
  EvalReport report;
  std::string error;  // non-empty when the condition failed
};

struct ExperimentSummary {
  std::vector<ResultRow> rows;
  std::size_t skipped = 0;  // conditions reused from an earlier run
  std::size_t failed = 0;
};

// Runs every condition (a "baseline" condition when none is configured)
// under cfg.output_dir.  Completed conditions carry a DONE marker and are
// not recomputed; a failing condition is recorded and the rest continue.
// Writes results.txt and results.csv.
ExperimentSummary run_experiment(const RunConfig& cfg);

std::string results_table(const std::vector<ResultRow>& rows);
std::string results_csv(const std::vector<ResultRow>& rows);

}  // namespace gci::harness

#endif  // GCI_HARNESS_PIPELINE_HPP_
