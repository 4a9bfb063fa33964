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

// gcinet: synth | prepare | train | detect | eval | experiment.
//
// Exit status: 0 success, 1 usage or configuration error, 2 data, file or
// format error, 3 numerical failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gci/checkpoint.hpp"
#include "gci/error.hpp"
#include "gci/harness/config.hpp"
#include "gci/harness/manifest.hpp"
#include "gci/harness/pipeline.hpp"
#include "gci/inference.hpp"
#include "gci/log.hpp"
#include "gci/wav.hpp"

namespace fs = std::filesystem;
using namespace gci;
using namespace gci::harness;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

// Config-backed flags.  Each one, when given, becomes a "section.key=value"
// override applied after the config file.
struct KeyFlag {
  const char* flag;
  const char* key;
  const char* help;
};

const std::vector<KeyFlag> kRunFlags = {
    {"--output", "run.output", "run directory"},
    {"--manifest", "corpus.manifest", "corpus manifest CSV"},
    {"--min-period-ms", "labels.min_period_ms", "dEGG peak spacing"},
    {"--prominence-frac", "labels.prominence_frac", "dEGG peak prominence fraction"},
    {"--invert-polarity", "labels.invert_polarity", "flip EGG polarity (true/false)"},
    {"--noise-file", "noise.file", "noise WAV (default: white noise)"},
    {"--noise-seed", "noise.seed", "noise offset/generation seed"},
    {"--snr", "noise.snr_db", "comma list of SNRs in dB or 'clean'"},
    {"--wd-ms", "framing.wd_ms", "detection window, ms"},
    {"--context-ms", "framing.context_ms", "context on each side, ms"},
    {"--shift", "framing.shift_samples", "framing hop, samples"},
    {"--layers", "model.num_conv_layers", "conv layers"},
    {"--kernel-size", "model.kernel_size", "conv kernel size"},
    {"--channels", "model.channels", "conv channels"},
    {"--dilations", "model.dilations", "'auto' or comma list"},
    {"--head-hidden", "model.head_hidden", "hidden units per head"},
    {"--input-scale", "model.input_scale", "none | per_frame_max_abs"},
    {"--pooling", "model.pooling", "max pooling after each conv (true/false)"},
    {"--model-seed", "model.seed", "weight init seed"},
    {"--batch-size", "train.batch_size", "minibatch size"},
    {"--epochs", "train.epochs", "training epochs"},
    {"--lr", "train.lr", "Adamax step size"},
    {"--w-c", "train.w_c", "classification weight"},
    {"--w-r", "train.w_r", "regression weight"},
    {"--train-seed", "train.seed", "shuffle seed"},
    {"--neg-to-pos", "train.neg_to_pos_ratio", "negative:positive ratio, 'inf' keeps all"},
    {"--train-snr", "train.snr", "SNR of the training data"},
    {"--split-mode", "split.mode", "utterance | speaker | dataset"},
    {"--train-fraction", "split.fraction", "training fraction"},
    {"--split-seed", "split.seed", "split seed"},
    {"--train-groups", "split.train_groups", "comma list of training speakers/datasets"},
    {"--test-groups", "split.test_groups", "comma list of test speakers/datasets"},
    {"--bin-size", "cluster.bin_size", "histogram bin, samples"},
    {"--threshold", "cluster.threshold", "candidate probability threshold"},
    {"--inference-shift", "cluster.inference_shift", "inference hop, samples"},
};

const std::vector<KeyFlag> kClusterFlags = {
    {"--bin-size", "cluster.bin_size", "histogram bin, samples"},
    {"--threshold", "cluster.threshold", "candidate probability threshold"},
    {"--inference-shift", "cluster.inference_shift", "inference hop, samples"},
    {"--prune-low-mass", "cluster.prune_low_mass", "drop light groups (true/false)"},
    {"--min-group-mass", "cluster.min_group_mass", "mass threshold for pruning"},
    {"--wd-ms", "framing.wd_ms", "expected detection window, ms"},
    {"--context-ms", "framing.context_ms", "expected context, ms"},
};

struct ConfigArgs {
  std::optional<std::string> file;
  std::vector<std::string> sets;
  std::map<std::string, std::string> values;  // key -> flag value

  void attach(CLI::App* app, const std::vector<KeyFlag>& flags) {
    app->add_option("--config", file, "INI run configuration")->check(CLI::ExistingFile);
    app->add_option("--set", sets, "override, section.key=value (repeatable)");
    for (const KeyFlag& f : flags) {
      app->add_option_function<std::string>(
          f.flag, [this, key = std::string(f.key)](const std::string& v) { values[key] = v; },
          std::string(f.help) + " [" + f.key + "]")
          ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);  // later flag wins
    }
  }

  bool touches(const std::string& section) const {
    for (const auto& [k, v] : values) {
      if (k.rfind(section + ".", 0) == 0) return true;
    }
    for (const std::string& s : sets) {
      if (s.rfind(section + ".", 0) == 0) return true;
    }
    return false;
  }

  RunConfig load() const {
    std::vector<std::string> overrides = sets;
    for (const auto& [k, v] : values) overrides.push_back(k + "=" + v);
    std::optional<fs::path> path;
    if (file) path = *file;
    return load_run_config(path, overrides);
  }
};

// Relative outputs land under $GCINET_OUTPUT_ROOT when it is set.  The
// parent directory is created.
fs::path output_path(const std::string& p) {
  fs::path out = p;
  if (out.is_relative()) {
    if (const char* root = std::getenv("GCINET_OUTPUT_ROOT"); root && *root) out = fs::path(root) / out;
  }
  out = fs::absolute(out).lexically_normal();
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  return out;
}

log::Level parse_level(const std::string& s) {
  static const std::map<std::string, log::Level> kLevels = {{"debug", log::Level::kDebug},
                                                            {"info", log::Level::kInfo},
                                                            {"warn", log::Level::kWarning},
                                                            {"error", log::Level::kError},
                                                            {"quiet", log::Level::kQuiet}};
  const auto it = kLevels.find(s);
  if (it == kLevels.end()) throw ConfigError("unknown log level '" + s + "'");
  return it->second;
}

void write_file_text(const fs::path& path, const std::string& text) {
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  os << text;
  if (!os) throw IoError("cannot write " + path.string());
}

SnrLevel single_snr(const RunConfig& cfg) { return cfg.train_snr; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gcinet: glottal closure instant detection"};
  app.require_subcommand(1);
  std::string level = "info";
  app.add_option("--log-level", level, "debug | info | warn | error | quiet");

  // synth
  CLI::App* synth = app.add_subcommand("synth", "write a synthetic voiced corpus");
  SynthCorpusSpec sc;
  std::string synth_out = "synth_corpus";
  bool no_egg = false;
  synth->add_option("--output", synth_out, "corpus directory");
  synth->add_option("--utterances", sc.utterances, "number of utterances");
  synth->add_option("--duration", sc.duration_s, "seconds per utterance");
  synth->add_option("--min-period-ms", sc.min_period_ms, "shortest pitch period");
  synth->add_option("--max-period-ms", sc.max_period_ms, "longest pitch period");
  synth->add_option("--speakers", sc.speakers, "number of synthetic speakers");
  synth->add_option("--formant-step", sc.speaker_formant_step, "per-speaker formant scaling");
  synth->add_option("--formant-jitter", sc.formant_jitter, "per-utterance formant jitter");
  synth->add_option("--noise-floor", sc.noise_floor, "std of additive noise");
  synth->add_option("--seed", sc.seed, "corpus seed");
  synth->add_option("--dataset", sc.dataset, "dataset id in the manifest");
  synth->add_option("--sample-rate", sc.sample_rate, "Hz");
  synth->add_flag("--no-egg", no_egg, "skip writing EGG files");

  CLI::App* prep = app.add_subcommand("prepare", "extract labels, mix noise and cache frames");
  ConfigArgs prep_args;
  prep_args.attach(prep, kRunFlags);

  CLI::App* trn = app.add_subcommand("train", "train on prepared caches");
  ConfigArgs train_args;
  train_args.attach(trn, kRunFlags);

  CLI::App* det = app.add_subcommand("detect", "detect GCIs in one WAV file");
  ConfigArgs det_args;
  det_args.attach(det, kClusterFlags);
  std::string ckpt, input, labels_out, cands_out;
  det->add_option("--checkpoint", ckpt, "model checkpoint")->required()->check(CLI::ExistingFile);
  det->add_option("--input", input, "speech WAV")->required()->check(CLI::ExistingFile);
  det->add_option("--labels", labels_out, "output label file")->required();
  det->add_option("--candidates", cands_out, "optional candidate dump");

  CLI::App* ev = app.add_subcommand("eval", "score detected against reference labels");
  std::string ref, detected, csv_out, report_out;
  int eval_rate = kDefaultSampleRate;
  ev->add_option("--reference", ref, "reference label file or directory")
      ->required()->check(CLI::ExistingPath);
  ev->add_option("--detected", detected, "detected label file or directory")
      ->required()->check(CLI::ExistingPath);
  ev->add_option("--sample-rate", eval_rate, "Hz");
  ev->add_option("--csv", csv_out, "write per-utterance CSV here");
  ev->add_option("--report", report_out, "write the pooled report here");

  CLI::App* exp = app.add_subcommand("experiment", "run every configured condition");
  ConfigArgs exp_args;
  exp_args.attach(exp, kRunFlags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    log::set_level(parse_level(level));

    if (*synth) {
      sc.write_egg = !no_egg;
      const fs::path out = output_path(synth_out);
      const auto entries = synth_corpus(sc, out);
      std::cout << "wrote " << entries.size() << " utterances to " << out.string() << "\n";
    } else if (*prep) {
      const RunConfig cfg = prep_args.load();
      if (cfg.manifest.empty()) throw ConfigError("prepare: no manifest ([corpus] manifest)");
      const auto entries = read_manifest(cfg.manifest);
      fs::create_directories(cfg.output_dir);
      write_file_text(cfg.output_dir / "resolved.ini", run_config_text(cfg));
      prepare(cfg, entries, cfg.output_dir / "prepared");
    } else if (*trn) {
      const RunConfig cfg = train_args.load();
      if (cfg.manifest.empty()) throw ConfigError("train: no manifest ([corpus] manifest)");
      const auto entries = read_manifest(cfg.manifest);
      const SnrLevel snr = single_snr(cfg);
      const fs::path dir = cfg.output_dir / ("train_" + snr_tag(snr));
      const TrainOutcome t =
          run_training(cfg, entries, cfg.output_dir / "prepared", snr, cfg.split, dir);
      std::cout << "checkpoint " << (dir / "model.ckpt").string() << " (" << t.train.size()
                << " train, " << t.test.size() << " test utterances)\n";
    } else if (*det) {
      const RunConfig cfg = det_args.load();
      const Model model = load_checkpoint(ckpt);
      const Waveform w = read_wav(input);
      if (det_args.file || det_args.touches("framing")) {
        cfg.framing.validate(w.sample_rate);
        check_compatible(model.config,
                         static_cast<std::size_t>(cfg.framing.wd_samples(w.sample_rate)),
                         static_cast<std::size_t>(cfg.framing.wi_samples(w.sample_rate)),
                         w.sample_rate);
      }
      std::vector<CandidateGci> cands;
      const GciLabels found = detect(model, w, cfg.cluster, &cands);
      write_labels(found, output_path(labels_out));
      if (!cands_out.empty()) write_candidates(cands, output_path(cands_out));
      std::cout << found.size() << " GCIs, " << cands.size() << " candidates\n";
    } else if (*ev) {
      const DetectionRun run = evaluate_files(ref, detected, eval_rate);
      const std::string text = report_text(run.pooled);
      std::cout << text;
      if (!csv_out.empty()) write_file_text(output_path(csv_out), evaluation_csv(run));
      if (!report_out.empty()) write_file_text(output_path(report_out), text);
    } else if (*exp) {
      const RunConfig cfg = exp_args.load();
      const ExperimentSummary s = run_experiment(cfg);
      std::cout << results_table(s.rows);
      if (s.failed > 0) {
        log::error(std::to_string(s.failed) + " condition(s) failed; see FAILED files under " +
                   cfg.output_dir.string());
        return kExitData;
      }
    }
  } catch (const ConfigError& e) {
    log::error(e.what());
    return kExitUsage;
  } catch (const NumericalError& e) {
    log::error(e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    log::error(e.what());
    return kExitData;
  }
  return kExitOk;
}
