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

#include "gci/harness/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "gci/checkpoint.hpp"
#include "gci/error.hpp"
#include "gci/framing.hpp"
#include "gci/log.hpp"
#include "gci/synth.hpp"
#include "gci/wav.hpp"

namespace gci::harness {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  os << text;
  if (!os) throw IoError("cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string num(double v, const char* f = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

// --- synthetic corpus -------------------------------------------------------

std::vector<ManifestEntry> synth_corpus(const SynthCorpusSpec& spec, const fs::path& out_dir) {
  if (spec.utterances == 0) throw ConfigError("synth: need at least one utterance");
  if (spec.speakers == 0) throw ConfigError("synth: need at least one speaker");
  if (!(spec.min_period_ms <= spec.max_period_ms)) {
    throw ConfigError("synth: min_period_ms exceeds max_period_ms");
  }
  if (!(spec.formant_jitter >= 0.0 && spec.formant_jitter < 1.0)) {
    throw ConfigError("synth: formant_jitter must be in [0, 1)");
  }
  fs::create_directories(out_dir / "wav");
  fs::create_directories(out_dir / "labels");
  if (spec.write_egg) fs::create_directories(out_dir / "egg");

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> jitter(1.0 - spec.formant_jitter, 1.0 + spec.formant_jitter);
  std::vector<ManifestEntry> entries;
  for (std::size_t k = 0; k < spec.utterances; ++k) {
    const std::size_t speaker = k % spec.speakers;
    const double scale = 1.0 + spec.speaker_formant_step * static_cast<double>(speaker);
    SynthSpec s;
    s.duration_s = spec.duration_s;
    const double lo = spec.min_period_ms, hi = spec.max_period_ms;
    s.pitch_periods_ms = k % 2 == 0 ? std::vector<double>{lo, 0.5 * (lo + hi), hi}
                                    : std::vector<double>{hi, 0.5 * (lo + hi), lo};
    for (Resonator& r : s.resonators) {
      r.center_hz *= scale * jitter(rng);
      r.bandwidth_hz *= jitter(rng);
    }
    s.noise_floor = spec.noise_floor;
    s.seed = spec.seed * 1000003ull + k;
    const SynthResult res = synth_voiced(s, spec.sample_rate);

    char id[32];
    std::snprintf(id, sizeof id, "utt%03zu", k);
    ManifestEntry e;
    e.id = id;
    e.speech = out_dir / "wav" / (e.id + ".wav");
    e.labels = out_dir / "labels" / (e.id + ".txt");
    e.speaker = "spk" + std::to_string(speaker);
    e.dataset = spec.dataset;
    write_wav(res.speech, e.speech);
    write_labels(res.epochs, e.labels);
    if (spec.write_egg) {
      e.egg = out_dir / "egg" / (e.id + ".wav");
      write_wav(synth_egg(res.epochs, res.speech.samples.size(), spec.sample_rate), e.egg);
    }
    entries.push_back(std::move(e));
  }
  write_manifest(entries, out_dir / "manifest.csv");
  return entries;
}

// --- utterances and noise ---------------------------------------------------

Utterance load_utterance(const ManifestEntry& entry, const DeggPeakOptions& degg) {
  try {
    Utterance u;
    u.entry = entry;
    u.clean = read_wav(entry.speech);
    if (!entry.labels.empty()) {
      u.reference = read_labels(entry.labels);
    } else {
      const Waveform egg = read_wav(entry.egg);
      if (egg.sample_rate != u.clean.sample_rate || egg.samples.size() != u.clean.samples.size()) {
        throw DataError("EGG and speech differ in rate or length");
      }
      u.reference = extract_gci_from_degg(egg, degg);
    }
    u.reference.require_within(u.clean.samples.size());
    return u;
  } catch (const DataError& e) {
    throw DataError("utterance " + entry.id + ": " + e.what());
  }
}

NoiseSource::NoiseSource(const RunConfig& cfg)
    : seed_(cfg.noise_seed), white_(cfg.noise_file.empty()) {
  if (!white_) noise_ = read_wav(cfg.noise_file);
}

Waveform NoiseSource::apply(const Utterance& u, const SnrLevel& snr) const {
  if (!snr) return u.clean;
  const std::uint64_t seed = seed_ ^ fnv1a(u.entry.id);
  try {
    if (white_) {
      return mix_noise(u.clean, white_noise(u.clean.samples.size(), u.clean.sample_rate, seed), *snr,
                       seed);
    }
    return mix_noise(u.clean, noise_, *snr, seed);
  } catch (const DataError& e) {
    throw DataError("utterance " + u.entry.id + ": " + e.what());
  }
}

// --- prepare ---------------------------------------------------------------

fs::path cache_path(const fs::path& root, const SnrLevel& snr, const std::string& id) {
  return root / snr_tag(snr) / (id + ".gcf");
}

namespace {

std::string fingerprint(const RunConfig& cfg, const std::vector<ManifestEntry>& entries,
                        const SnrLevel& snr) {
  std::ostringstream os;
  os << "snr " << snr_label(snr) << "\n";
  os << "framing " << num(cfg.framing.wd_ms) << " " << num(cfg.framing.context_ms) << " "
     << cfg.framing.shift_samples << "\n";
  os << "labels " << num(cfg.degg.min_period_ms) << " " << num(cfg.degg.prominence_frac) << " "
     << cfg.degg.invert_polarity << "\n";
  os << "noise " << cfg.noise_file.string() << " " << cfg.noise_seed << "\n";
  for (const ManifestEntry& e : entries) {
    os << e.id << " " << e.speech.string() << " " << e.egg.string() << " " << e.labels.string()
       << "\n";
  }
  return os.str();
}

}  // namespace

void prepare(const RunConfig& cfg, const std::vector<ManifestEntry>& entries, const fs::path& root) {
  if (entries.empty()) throw DataError("prepare: empty manifest");
  const NoiseSource noise(cfg);
  std::vector<Utterance> utts;
  for (const ManifestEntry& e : entries) utts.push_back(load_utterance(e, cfg.degg));
  fs::create_directories(root / "labels");
  for (const Utterance& u : utts) write_labels(u.reference, root / "labels" / (u.entry.id + ".txt"));

  for (const SnrLevel& snr : cfg.snrs) {
    const fs::path dir = root / snr_tag(snr);
    const fs::path stamp = dir / "fingerprint.txt";
    const std::string fp = fingerprint(cfg, entries, snr);
    bool fresh = fs::exists(stamp) && read_text(stamp) == fp;
    for (const ManifestEntry& e : entries) fresh = fresh && fs::exists(cache_path(root, snr, e.id));
    if (fresh) {
      log::info("prepare: " + snr_tag(snr) + " caches up to date");
      continue;
    }
    fs::create_directories(dir);
    fs::remove(stamp);
    std::size_t frames = 0;
    for (const Utterance& u : utts) {
      const Waveform speech = noise.apply(u, snr);
      FrameDataset ds;
      try {
        ds = make_frames(speech, u.reference, cfg.framing);
      } catch (const DataError& e) {
        throw DataError("utterance " + u.entry.id + " (" + u.entry.speech.string() + "): " + e.what());
      }
      frames += ds.size();
      save_dataset(ds, cache_path(root, snr, u.entry.id));
      if (snr) write_wav(speech, dir / (u.entry.id + ".wav"), WavEncoding::kFloat32);
    }
    write_text(stamp, fp);
    log::info("prepare: " + snr_tag(snr) + ": " + std::to_string(utts.size()) + " utterances, " +
              std::to_string(frames) + " frames");
  }
}

// --- train -----------------------------------------------------------------

TrainOutcome run_training(const RunConfig& cfg, const std::vector<ManifestEntry>& entries,
                          const fs::path& prepared_root, const SnrLevel& snr,
                          const SplitSpec& split_spec, const fs::path& out_dir) {
  const std::vector<UtteranceRef> refs = utterance_refs(entries);
  if (refs.empty()) throw DataError("train: empty manifest");
  const Split split = train_test_split(refs, split_spec);
  if (split.train.empty()) throw DataError("train: the split left no training utterances");

  FrameDataset data;
  bool first = true;
  for (std::size_t i : split.train) {
    const fs::path p = cache_path(prepared_root, snr, entries[i].id);
    if (!fs::exists(p)) {
      throw DataError("train: no prepared cache " + p.string() + " (run prepare for " +
                      snr_label(snr) + " first)");
    }
    FrameDataset ds = load_dataset(p);
    if (first) {
      data = std::move(ds);
      first = false;
    } else {
      data.append(ds);
    }
  }
  if (data.empty()) throw DataError("train: training utterances produced no frames");
  if (data.config() != cfg.framing) {
    throw ConfigError("config conflict: prepared caches use different framing; rerun prepare");
  }
  if (cfg.neg_to_pos_ratio != kKeepAllNegatives) {
    data = class_balance_subsample(data, cfg.neg_to_pos_ratio, cfg.train.seed);
  }
  log::info("train: " + std::to_string(split.train.size()) + " utterances, " +
            std::to_string(data.size()) + " frames (" + std::to_string(data.positives()) +
            " positive), SNR " + snr_label(snr));

  TrainOutcome out;
  out.model = build_model(cfg.resolved_model(data.sample_rate()), cfg.model_seed);
  out.epochs = train(out.model, data, cfg.train, [](const EpochStats& s) {
    log::info("epoch " + std::to_string(s.epoch) + ": loss " + num(s.loss, "%.6f") +
              " (classification " + num(s.classification, "%.6f") + ", regression " +
              num(s.regression, "%.6f") + ")");
  });
  out.train = split.train;
  out.test = split.test;

  fs::create_directories(out_dir);
  save_checkpoint(out.model, out_dir / "model.ckpt");
  std::string loss = "epoch,loss,classification,regression\n";
  for (const EpochStats& s : out.epochs) {
    loss += std::to_string(s.epoch) + "," + num(s.loss) + "," + num(s.classification) + "," +
            num(s.regression) + "\n";
  }
  write_text(out_dir / "loss.csv", loss);
  std::string sides = "id,side\n";
  for (std::size_t i : split.train) sides += entries[i].id + ",train\n";
  for (std::size_t i : split.test) sides += entries[i].id + ",test\n";
  write_text(out_dir / "split.csv", sides);
  write_text(out_dir / "resolved.ini", run_config_text(cfg));
  return out;
}

// --- detect / evaluate -------------------------------------------------------

DetectionRun detect_and_evaluate(const RunConfig& cfg, const Model& model,
                                 const std::vector<ManifestEntry>& entries,
                                 const std::vector<std::size_t>& which, const SnrLevel& snr,
                                 const fs::path& out_dir) {
  const NoiseSource noise(cfg);
  fs::create_directories(out_dir);
  DetectionRun run;
  for (std::size_t i : which) {
    const Utterance u = load_utterance(entries.at(i), cfg.degg);
    const Waveform speech = noise.apply(u, snr);
    const GciLabels found = detect(model, speech, cfg.cluster);
    write_labels(found, out_dir / (u.entry.id + ".txt"));
    if (u.reference.size() < 2) {
      log::warn("utterance " + u.entry.id + ": fewer than 2 reference marks, not scored");
      continue;
    }
    run.ids.push_back(u.entry.id);
    run.reports.push_back(evaluate(u.reference, found, speech.sample_rate));
  }
  if (run.reports.empty()) throw DataError("evaluation: no utterance could be scored");
  run.pooled = aggregate(run.reports);
  return run;
}

std::string evaluation_csv(const DetectionRun& run) {
  std::string s = report_csv_header();
  for (std::size_t i = 0; i < run.ids.size(); ++i) s += report_csv_row(run.ids[i], run.reports[i]);
  s += report_csv_row("POOLED", run.pooled);
  return s;
}

namespace {

std::map<std::string, fs::path> label_files(const fs::path& p) {
  std::map<std::string, fs::path> out;
  if (fs::is_directory(p)) {
    for (const auto& de : fs::directory_iterator(p)) {
      if (de.is_regular_file() && de.path().extension() == ".txt") {
        out[de.path().stem().string()] = de.path();
      }
    }
  } else if (fs::exists(p)) {
    out[p.stem().string()] = p;
  } else {
    throw DataError("evaluation: " + p.string() + " does not exist");
  }
  return out;
}

}  // namespace

DetectionRun evaluate_files(const fs::path& reference, const fs::path& detected, int sample_rate) {
  DetectionRun run;
  if (!fs::is_directory(reference) && !fs::is_directory(detected)) {
    run.ids.push_back(reference.stem().string());
    run.reports.push_back(evaluate(read_labels(reference), read_labels(detected), sample_rate));
  } else {
    if (!fs::is_directory(reference) || !fs::is_directory(detected)) {
      throw DataError("evaluation: pass two files or two directories");
    }
    const auto refs = label_files(reference);
    const auto dets = label_files(detected);
    std::string unmatched;
    for (const auto& [id, p] : refs) {
      if (!dets.count(id)) unmatched += " " + id + " (no detection)";
    }
    for (const auto& [id, p] : dets) {
      if (!refs.count(id)) unmatched += " " + id + " (no reference)";
    }
    if (!unmatched.empty()) throw DataError("evaluation: unmatched label files:" + unmatched);
    if (refs.empty()) throw DataError("evaluation: no .txt label files in " + reference.string());
    for (const auto& [id, p] : refs) {
      run.ids.push_back(id);
      run.reports.push_back(evaluate(read_labels(p), read_labels(dets.at(id)), sample_rate));
    }
  }
  run.pooled = aggregate(run.reports);
  return run;
}

// --- experiments -------------------------------------------------------------

namespace {

std::string row_csv(const ResultRow& r) {
  const EvalReport& e = r.report;
  return r.condition + "," + r.train_snr + "," + r.test_snr + "," + std::to_string(e.n_cycles) +
         "," + std::to_string(e.identified) + "," + std::to_string(e.missed) + "," +
         std::to_string(e.false_alarms) + "," + std::to_string(e.ignored_detections) + "," +
         num(e.idr, "%.4f") + "," + num(e.mr, "%.4f") + "," + num(e.far, "%.4f") + "," +
         num(e.ida_ms, "%.4f") + "," + r.error + "\n";
}

constexpr const char* kResultsHeader =
    "condition,train_snr,test_snr,n_cycles,identified,missed,false_alarms,ignored_detections,"
    "idr,mr,far,ida_ms,error\n";

std::vector<ResultRow> read_rows(const fs::path& path) {
  std::istringstream is(read_text(path));
  std::string line;
  std::getline(is, line);
  std::vector<ResultRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() < 12) throw FormatError("malformed results row in " + path.string());
    ResultRow r;
    r.condition = f[0];
    r.train_snr = f[1];
    r.test_snr = f[2];
    r.report.n_cycles = std::stoul(f[3]);
    r.report.identified = std::stoul(f[4]);
    r.report.missed = std::stoul(f[5]);
    r.report.false_alarms = std::stoul(f[6]);
    r.report.ignored_detections = std::stoul(f[7]);
    r.report.idr = std::stod(f[8]);
    r.report.mr = std::stod(f[9]);
    r.report.far = std::stod(f[10]);
    r.report.ida_ms = std::stod(f[11]);
    if (f.size() > 12) r.error = f[12];
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ResultRow> run_condition(const RunConfig& cfg, const Condition& cond,
                                     const std::vector<ManifestEntry>& entries,
                                     const fs::path& prepared, const fs::path& dir) {
  const TrainOutcome t = run_training(cfg, entries, prepared, cond.train_snr, cond.split, dir);
  if (t.test.empty()) throw DataError("condition " + cond.name + ": empty test split");
  std::vector<ResultRow> rows;
  for (const SnrLevel& snr : cond.test_snrs) {
    const DetectionRun run =
        detect_and_evaluate(cfg, t.model, entries, t.test, snr, dir / "detect" / snr_tag(snr));
    write_text(dir / ("eval_" + snr_tag(snr) + ".csv"), evaluation_csv(run));
    write_text(dir / ("report_" + snr_tag(snr) + ".txt"), report_text(run.pooled));
    rows.push_back({cond.name, snr_label(cond.train_snr), snr_label(snr), run.pooled, ""});
    log::info("condition " + cond.name + ", test " + snr_label(snr) + ": IDR " +
              num(run.pooled.idr, "%.2f") + " MR " + num(run.pooled.mr, "%.2f") + " FAR " +
              num(run.pooled.far, "%.2f") + " IDA " + num(run.pooled.ida_ms, "%.4f") + " ms");
  }
  return rows;
}

}  // namespace

ExperimentSummary run_experiment(const RunConfig& base) {
  if (base.manifest.empty()) throw ConfigError("experiment: [corpus] manifest is not set");
  const std::vector<ManifestEntry> entries = read_manifest(base.manifest);
  std::vector<Condition> conditions = base.conditions;
  if (conditions.empty()) {
    Condition c;
    c.name = "baseline";
    c.train_snr = base.train_snr;
    c.test_snrs = {base.train_snr};
    c.split = base.split;
    conditions.push_back(c);
  }
  const fs::path out = base.output_dir;
  fs::create_directories(out);
  write_text(out / "resolved.ini", run_config_text(base));

  // Only training needs frame caches; test speech is mixed on the fly.
  RunConfig prep = base;
  prep.snrs.clear();
  std::set<std::string> seen;
  for (const Condition& c : conditions) {
    if (seen.insert(snr_tag(c.train_snr)).second) prep.snrs.push_back(c.train_snr);
  }
  const fs::path prepared = out / "prepared";
  prepare(prep, entries, prepared);

  ExperimentSummary summary;
  for (const Condition& c : conditions) {
    const fs::path dir = out / c.name;
    const fs::path done = dir / "DONE";
    if (fs::exists(done) && fs::exists(dir / "results.csv")) {
      log::info("condition " + c.name + ": already complete, skipping");
      for (ResultRow& r : read_rows(dir / "results.csv")) summary.rows.push_back(std::move(r));
      ++summary.skipped;
      continue;
    }
    fs::create_directories(dir);
    fs::remove(dir / "FAILED");
    try {
      std::vector<ResultRow> rows = run_condition(base, c, entries, prepared, dir);
      write_text(dir / "results.csv", kResultsHeader + [&] {
        std::string s;
        for (const ResultRow& r : rows) s += row_csv(r);
        return s;
      }());
      write_text(done, "");
      for (ResultRow& r : rows) summary.rows.push_back(std::move(r));
    } catch (const std::exception& e) {
      log::error("condition " + c.name + " failed: " + e.what());
      write_text(dir / "FAILED", std::string(e.what()) + "\n");
      std::string msg = e.what();
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      summary.rows.push_back({c.name, snr_label(c.train_snr), "-", {}, msg});
      ++summary.failed;
    }
  }
  write_text(out / "results.txt", results_table(summary.rows));
  write_text(out / "results.csv", results_csv(summary.rows));
  return summary;
}

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::string s = kResultsHeader;
  for (const ResultRow& r : rows) s += row_csv(r);
  return s;
}

std::string results_table(const std::vector<ResultRow>& rows) {
  std::vector<std::vector<std::string>> cells = {
      {"condition", "train", "test", "IDR %", "MR %", "FAR %", "IDA ms", "cycles"}};
  for (const ResultRow& r : rows) {
    if (!r.error.empty()) {
      cells.push_back({r.condition, r.train_snr, r.test_snr, "failed", "", "", "", ""});
      continue;
    }
    cells.push_back({r.condition, r.train_snr, r.test_snr, num(r.report.idr, "%.2f"),
                     num(r.report.mr, "%.2f"), num(r.report.far, "%.2f"),
                     num(r.report.ida_ms, "%.3f"), std::to_string(r.report.n_cycles)});
  }
  std::vector<std::size_t> width(cells[0].size(), 0);
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::string s;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    std::string line;
    for (std::size_t i = 0; i < cells[r].size(); ++i) {
      const std::string& c = cells[r][i];
      const std::string pad(width[i] - c.size(), ' ');
      line += i < 3 ? c + pad : pad + c;
      if (i + 1 < cells[r].size()) line += "  ";
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    s += line + "\n";
    if (r == 0) s += std::string(line.size(), '-') + "\n";
  }
  return s;
}

}  // namespace gci::harness
