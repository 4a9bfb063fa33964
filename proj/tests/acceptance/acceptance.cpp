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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only
// when every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gci/error.hpp"
#include "gci/framing.hpp"
#include "gci/harness/config.hpp"
#include "gci/harness/pipeline.hpp"
#include "gci/inference.hpp"
#include "gci/log.hpp"
#include "gci/loss.hpp"
#include "gci/metrics.hpp"
#include "gci/model.hpp"
#include "gci/nn/ops.hpp"
#include "gci/signal.hpp"
#include "gci/synth.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace gci;
using nn::Tensor;
using oracle::random_tensor;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double probe(const Tensor& y, const Tensor& r) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * r[i];
  return s;
}

// --- 1: gradient suite ---------------------------------------------------------

Outcome gradient_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  constexpr int kInstances = 100;
  std::map<std::string, double> worst;
  std::size_t kinks = 0, checked = 0;
  auto note = [&](const std::string& op, const oracle::GradCheck& g) {
    worst[op] = std::max(worst[op], g.max_rel_error);
    kinks += g.kinks;
    checked += g.checked;
  };
  std::mt19937_64 rng(2024);
  for (int i = 0; i < kInstances; ++i) {
    {
      const std::size_t K = 1 + rng() % 4, d = 1 + rng() % 3;
      const std::size_t T = (K - 1) * d + 2 + rng() % 6;
      Tensor x = random_tensor({2, 2, T}, rng), w = random_tensor({2, 2, K}, rng);
      Tensor b = random_tensor({2}, rng);
      const Tensor r = random_tensor({2, 2, T - (K - 1) * d}, rng);
      const nn::Conv1dGrads g = nn::conv1d_backward(r, x, w, d);
      auto f = [&] { return probe(nn::conv1d_forward(x, w, b, d), r); };
      note("conv1d", oracle::check_gradient(f, x.values(), g.grad_x.values()));
      note("conv1d", oracle::check_gradient(f, w.values(), g.grad_w.values()));
      note("conv1d", oracle::check_gradient(f, b.values(), g.grad_b.values()));
    }
    {
      Tensor x = random_tensor({2, 2, 2 + rng() % 7}, rng);
      const nn::MaxPoolResult p = nn::maxpool_forward(x);
      const Tensor r = random_tensor(p.output.shape(), rng);
      const Tensor g = nn::maxpool_backward(r, p.argmax, x.shape());
      auto f = [&] { return probe(nn::maxpool_forward(x).output, r); };
      note("maxpool", oracle::check_gradient(f, x.values(), g.values()));
    }
    {
      Tensor x = random_tensor({2, 6}, rng, -4.0, 3.0);
      const Tensor r = random_tensor({2, 6}, rng);
      auto f = [&] { return probe(nn::selu(x), r); };
      note("selu", oracle::check_gradient(f, x.values(), nn::selu_backward(x, r).values()));
      note("selu", oracle::check_gradient(
                       f, x.values(), nn::selu_backward_from_output(nn::selu(x), r).values()));
    }
    {
      Tensor x = random_tensor({3, 4}, rng), w = random_tensor({2, 4}, rng);
      Tensor b = random_tensor({2}, rng);
      const Tensor r = random_tensor({3, 2}, rng);
      const nn::DenseGrads g = nn::dense_backward(r, x, w);
      auto f = [&] { return probe(nn::dense_forward(x, w, b), r); };
      note("dense", oracle::check_gradient(f, x.values(), g.grad_x.values()));
      note("dense", oracle::check_gradient(f, w.values(), g.grad_w.values()));
      note("dense", oracle::check_gradient(f, b.values(), g.grad_b.values()));
    }
    {
      Tensor x = random_tensor({5}, rng, -6.0, 6.0);
      const Tensor r = random_tensor({5}, rng);
      auto fs = [&] { return probe(nn::sigmoid(x), r); };
      note("sigmoid",
           oracle::check_gradient(fs, x.values(), nn::sigmoid_backward(nn::sigmoid(x), r).values()));
      Tensor xh = random_tensor({5}, rng, -10.0, 40.0);
      auto fh = [&] { return probe(nn::hardtanh_bounded(xh, 0.0, 32.0), r); };
      note("hardtanh", oracle::check_gradient(
                           fh, xh.values(), nn::hardtanh_bounded_backward(xh, r, 0.0, 32.0).values()));
    }
    {
      const std::size_t n = 2 + rng() % 6;
      std::vector<double> yc(n), yr(n), tr(n);
      std::vector<std::uint8_t> tc(n);
      std::uniform_real_distribution<double> u(0.05, 0.95), v(0.0, 32.0);
      for (std::size_t j = 0; j < n; ++j) {
        yc[j] = u(rng);
        yr[j] = v(rng);
        tc[j] = j == 0 ? 1 : rng() % 2;
        tr[j] = tc[j] ? std::floor(v(rng)) : 0.0;
      }
      const JointLoss l = joint_loss(yc, yr, tc, tr);
      auto f = [&] { return joint_loss(yc, yr, tc, tr).terms.loss; };
      note("joint_loss", oracle::check_gradient(f, yc, l.grad_y_c, 1e-6));
      note("joint_loss", oracle::check_gradient(f, yr, l.grad_y_r));
    }
    {
      ModelConfig c;
      c.num_conv_layers = 2;
      c.kernel_size = 3;
      c.channels = 2;
      c.head_hidden = 3;
      c.wd_samples = 8;
      c.wi_samples = 40;
      c.input_scale = InputScale::kNone;
      Model m = build_model(c, 1000 + i);
      std::uniform_real_distribution<double> jitter(-0.05, 0.05);
      for (Tensor* p : m.parameters()) {
        for (double& x : p->values()) x += jitter(rng);
      }
      const Tensor batch = random_tensor({4, 40}, rng);
      const std::vector<std::uint8_t> tc = {1, 0, 1, 0};
      const std::vector<double> tr = {2.0, 0.0, 5.0, 0.0};
      std::vector<Tensor> grads, scratch;
      forward_backward(m, batch, tc, tr, LossWeights{}, grads);
      auto f = [&] { return forward_backward(m, batch, tc, tr, LossWeights{}, scratch).loss; };
      const auto params = m.parameters();
      for (std::size_t k = 0; k < params.size(); ++k) {
        note("model", oracle::check_gradient(f, params[k]->values(), grads[k].values()));
      }
    }
  }
  const double secs = seconds_since(t0);
  double max_err = 0.0;
  std::string per_op;
  for (const auto& [op, e] : worst) {
    max_err = std::max(max_err, e);
    per_op += " " + op + "=" + fmt("%.1e", e);
  }
  // Skipped coordinates sit on a pooling tie or clamp edge; they must stay rare.
  const bool few_kinks = kinks * 100 < checked;
  return {max_err < 1e-4 && secs < 60.0 && few_kinks,
          "max rel error " + fmt("%.2e", max_err) + " (< 1e-4) over " +
              std::to_string(kInstances) + " instances per operator, " + std::to_string(checked) +
              " coordinates, " + std::to_string(kinks) + " at kinks;" + per_op + "; " +
              fmt("%.1f", secs) + " s (< 60 s)"};
}

// --- 2: dilation equivalence -------------------------------------------------

Outcome dilation_equivalence() {
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t K = 2 + rng() % 4, d = 1 + rng() % 8;
    const std::size_t T = (K - 1) * d + 1 + rng() % 40;
    const Tensor x = random_tensor({1 + rng() % 3, 1 + rng() % 4, T}, rng);
    const Tensor w = random_tensor({1 + rng() % 4, x.dim(1), K}, rng);
    const Tensor b = random_tensor({w.dim(0)}, rng);
    const Tensor a = nn::conv1d_forward(x, w, b, d);
    const Tensor z = nn::conv1d_forward(x, oracle::zero_stuff(w, d), b, 1);
    if (a.shape() != z.shape()) return {false, "shape mismatch"};
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - z[k]));
  }
  return {worst <= 1e-12, "max |dilated - zero-stuffed| " + fmt("%.1e", worst) +
                              " (<= 1e-12) on 100 cases"};
}

// --- 3: framing oracle -------------------------------------------------------

Outcome framing_oracle() {
  std::mt19937_64 rng(3);
  std::size_t checked_labels = 0, bad = 0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = 500 + rng() % 4000;
    std::vector<std::int64_t> pos;
    for (std::int64_t at = rng() % 50; at < static_cast<std::int64_t>(n); at += 32 + rng() % 300) {
      pos.push_back(at);
    }
    Waveform w = white_noise(n, 16000, i);
    const FrameDataset ds = make_frames(w, GciLabels(pos));
    const std::set<std::int64_t> lab(pos.begin(), pos.end());
    std::map<std::int64_t, std::vector<double>> seen;
    for (std::size_t r = 0; r < ds.size(); ++r) {
      if (!ds.t_c(r)) continue;
      const auto g = ds.origin(r) + 80 + static_cast<std::int64_t>(ds.t_r(r));
      if (!lab.count(g)) ++bad;
      seen[g].push_back(ds.t_r(r));
    }
    for (std::int64_t g : pos) {
      if (g - 111 < 0 || g - 80 > static_cast<std::int64_t>(n) - 192) continue;  // frame cannot fit
      ++checked_labels;
      const auto& tr = seen[g];
      bool ok = tr.size() == 32;
      for (std::size_t k = 0; ok && k < 32; ++k) ok = tr[k] == 31.0 - k;
      if (!ok) ++bad;
    }
  }
  return {bad == 0 && checked_labels > 0,
          std::to_string(checked_labels) + " labels over 50 signals, " + std::to_string(bad) +
              " violations (32 positives, t_r 31..0, reconstruction)"};
}

// --- 4: loss arithmetic ------------------------------------------------------

Outcome loss_arithmetic() {
  const std::vector<double> yc = {0.5, 0.5}, yr = {12.0, 7.0}, tr = {10.0, 0.0};
  const std::vector<std::uint8_t> tc = {1, 0};
  const JointLoss l = joint_loss(yc, yr, tc, tr, {1.0, 10.0, 1e-7});
  const bool ok = std::abs(l.terms.loss - 40.693) < 1e-3 && l.grad_y_r[1] == 0.0;
  return {ok, "L = " + fmt("%.6f", l.terms.loss) + " (40.693 +/- 1e-3), regression gradient on "
                                                   "the negative record " +
                  fmt("%g", l.grad_y_r[1]) + " (exactly 0)"};
}

// --- 5: clustering oracle ----------------------------------------------------

Outcome clustering_oracle() {
  std::mt19937_64 rng(5);
  std::size_t mismatches = 0;
  double mass_err = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t len = 300 + rng() % 3000;
    std::uniform_real_distribution<double> loc(0.0, len - 1e-9), p(0.5, 1.0);
    std::vector<CandidateGci> c(rng() % 120);
    for (auto& x : c) x = {loc(rng), p(rng)};
    std::sort(c.begin(), c.end(), [](auto& a, auto& b) { return a.location < b.location; });
    ClusterConfig cfg;
    cfg.bin_size = 1 + rng() % 10;
    if (cluster_candidates(c, cfg, len).positions() != oracle::cluster_brute(c, cfg.bin_size)) {
      ++mismatches;
    }
    double m = 0.0, h = 0.0;
    for (const auto& x : c) m += x.probability;
    for (double v : candidate_histogram(c, cfg.bin_size, len)) h += v;
    mass_err = std::max(mass_err, std::abs(m - h));
  }
  return {mismatches == 0 && mass_err <= 1e-9,
          std::to_string(mismatches) + "/1000 mismatches vs brute force, max mass error " +
              fmt("%.1e", mass_err) + " (<= 1e-9)"};
}

// --- 6: metrics oracle -------------------------------------------------------

Outcome metrics_oracle() {
  const GciLabels ref({100, 260, 420});
  const EvalReport a = evaluate(ref, ref, 16000);
  const EvalReport b = evaluate(ref, GciLabels({100, 420}), 16000);
  const EvalReport c = evaluate(ref, GciLabels({100, 255, 265, 420}), 16000);
  const bool examples = a.identified == 3 && a.missed == 0 && a.false_alarms == 0 &&
                        a.ida_ms == 0.0 && b.identified == 2 && b.missed == 1 &&
                        b.false_alarms == 0 && c.identified == 2 && c.missed == 0 &&
                        c.false_alarms == 1;
  std::mt19937_64 rng(6);
  std::size_t broken = 0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::int64_t> r, d;
    const std::size_t nr = 2 + rng() % 50;
    for (std::int64_t at = rng() % 50; r.size() < nr; at += 1 + rng() % 300) r.push_back(at);
    for (std::int64_t at = rng() % 50, k = rng() % 70; k > 0; --k, at += 1 + rng() % 250) d.push_back(at);
    const EvalReport e = evaluate(GciLabels(r), GciLabels(d), 16000);
    const oracle::CycleCount o = oracle::evaluate_brute(GciLabels(r), GciLabels(d), 16000);
    if (e.identified + e.missed + e.false_alarms != e.n_cycles || e.identified != o.identified ||
        e.false_alarms != o.false_alarms) {
      ++broken;
    }
  }
  return {examples && broken == 0,
          std::string("hand examples ") + (examples ? "exact" : "WRONG") + " (IDR " +
              fmt("%.1f", b.idr) + "/MR " + fmt("%.1f", b.mr) + ", FAR " + fmt("%.1f", c.far) +
              "); partition or oracle violations " + std::to_string(broken) + "/1000"};
}

// --- 7: SNR ------------------------------------------------------------------

Outcome snr_accuracy() {
  SynthSpec s;
  s.duration_s = 2.0;
  s.pitch_periods_ms = {5.0, 12.0};
  const Waveform clean = synth_voiced(s).speech;
  const Waveform noise = white_noise(clean.size() / 2, 16000, 1);
  double worst = 0.0;
  for (double snr : {0.0, 5.0, 10.0, 15.0, 20.0, 25.0}) {
    const Waveform mixed = mix_noise(clean, noise, snr, 42);
    std::vector<double> added(clean.size());
    for (std::size_t i = 0; i < added.size(); ++i) added[i] = mixed.samples[i] - clean.samples[i];
    worst = std::max(worst, std::abs(snr_db(clean.samples, added) - snr));
  }
  return {worst <= 0.01, "max |measured - requested| " + fmt("%.2e", worst) +
                             " dB (<= 0.01) for SNR 0..25 dB"};
}

// --- 8-10: end to end -------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

// 20 utterances x 3 s = 60 s, two synthetic speakers, pitch swept over
// [4, 16] ms.  10 % of utterances train, the rest test.
std::string experiment_ini(const fs::path& out, const fs::path& manifest, bool full) {
  std::string s = "[run]\noutput = " + out.string() + "\n[corpus]\nmanifest = " +
                  manifest.string() +
                  "\n[model]\nchannels = 16\ninput_scale = none\nseed = 1\n"
                  "[train]\nepochs = 3\nbatch_size = 256\nlr = 0.002\nseed = 1\n"
                  "[noise]\nseed = 11\n[split]\nmode = utterance\nfraction = 0.1\nseed = 3\n"
                  "[condition.clean]\ntrain_snr = clean\ntest_snr = clean\n";
  if (full) {
    s += "[condition.train0]\ntrain_snr = 0\ntest_snr = 10, clean\n"
         "[condition.train10]\ntrain_snr = 10\ntest_snr = 10\n";
  }
  return s;
}

harness::ExperimentSummary run_ini(const fs::path& dir, const std::string& ini) {
  fs::create_directories(dir);
  std::ofstream(dir / "run.ini") << ini;
  return harness::run_experiment(harness::load_run_config(dir / "run.ini"));
}

const EvalReport* find_row(const harness::ExperimentSummary& s, const std::string& cond,
                           const std::string& test) {
  for (const auto& r : s.rows) {
    if (r.condition == cond && r.test_snr == test && r.error.empty()) return &r.report;
  }
  return nullptr;
}

// Every file under the condition directory that carries results, keyed by
// relative path.  resolved.ini is excluded: it records the absolute run dir.
std::map<std::string, std::string> result_files(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().filename() == "resolved.ini") continue;
    out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gcinet acceptance suite"};
  std::string work = (fs::temp_directory_path() / "gcinet_acceptance").string();
  std::vector<int> only;
  app.add_option("--work-dir", work, "scratch directory for the end-to-end runs");
  app.add_option("--only", only, "run just these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  log::set_level(log::Level::kWarning);
  auto want = [&](int k) { return only.empty() || std::count(only.begin(), only.end(), k); };

  int failures = 0;
  auto report = [&](int k, const char* name, const Outcome& o) {
    std::printf("[%s] criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", k, name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  };
  auto guarded = [&](int k, const char* name, Outcome (*fn)()) {
    if (!want(k)) return;
    try {
      report(k, name, fn());
    } catch (const std::exception& e) {
      report(k, name, {false, std::string("exception: ") + e.what()});
    }
  };

  guarded(1, "gradient suite", gradient_suite);
  guarded(2, "dilated convolution equivalence", dilation_equivalence);
  guarded(3, "framing oracle", framing_oracle);
  guarded(4, "loss arithmetic", loss_arithmetic);
  guarded(5, "clustering oracle", clustering_oracle);
  guarded(6, "metrics oracle", metrics_oracle);
  guarded(7, "SNR accuracy", snr_accuracy);

  if (want(8) || want(9) || want(10)) {
    try {
      const fs::path root = fs::absolute(work);
      fs::remove_all(root);
      harness::SynthCorpusSpec spec;
      spec.utterances = 20;
      spec.duration_s = 3.0;
      spec.min_period_ms = 4.0;
      spec.max_period_ms = 16.0;
      const auto entries = harness::synth_corpus(spec, root / "corpus");
      const fs::path manifest = root / "corpus" / "manifest.csv";

      const auto t0 = std::chrono::steady_clock::now();
      const harness::ExperimentSummary a =
          run_ini(root / "run_a", experiment_ini(root / "run_a", manifest, want(9)));
      const double minutes = seconds_since(t0) / 60.0;

      if (want(8)) {
        const EvalReport* r = find_row(a, "clean", "clean");
        if (!r) {
          report(8, "end-to-end clean", {false, "clean condition failed"});
        } else {
          const bool ok = r->idr >= 95.0 && r->ida_ms <= 0.5 && r->far <= 3.0;
          report(8, "end-to-end clean",
                 {ok, "IDR " + fmt("%.2f", r->idr) + " % (>= 95), IDA " + fmt("%.3f", r->ida_ms) +
                          " ms (<= 0.5), FAR " + fmt("%.2f", r->far) + " % (<= 3), MR " +
                          fmt("%.2f", r->mr) + " %, " + std::to_string(r->n_cycles) +
                          " test cycles, 60 s corpus, whole run " + fmt("%.1f", minutes) +
                          " min"});
        }
      }
      if (want(9)) {
        const EvalReport* x10 = find_row(a, "train0", "10");
        const EvalReport* xc = find_row(a, "train0", "clean");
        const EvalReport* m10 = find_row(a, "train10", "10");
        const EvalReport* mc = find_row(a, "clean", "clean");
        if (!x10 || !xc || !m10 || !mc) {
          report(9, "cross-SNR robustness", {false, "a condition failed"});
        } else {
          const double d10 = m10->idr - x10->idr, dc = mc->idr - xc->idr;
          report(9, "cross-SNR robustness",
                 {d10 <= 5.0 && dc <= 5.0,
                  "train 0 dB: test 10 dB IDR " + fmt("%.2f", x10->idr) + " vs matched " +
                      fmt("%.2f", m10->idr) + " (drop " + fmt("%.2f", d10) +
                      " pp <= 5); test clean IDR " + fmt("%.2f", xc->idr) + " vs matched " +
                      fmt("%.2f", mc->idr) + " (drop " + fmt("%.2f", dc) + " pp <= 5)"});
        }
      }
      if (want(10)) {
        run_ini(root / "run_b", experiment_ini(root / "run_b", manifest, false));
        const auto fa = result_files(root / "run_a" / "clean");
        const auto fb = result_files(root / "run_b" / "clean");
        std::size_t differing = 0;
        for (const auto& [name, bytes] : fa) {
          const auto it = fb.find(name);
          if (it == fb.end() || it->second != bytes) ++differing;
        }
        differing += fb.size() > fa.size() ? fb.size() - fa.size() : 0;
        const bool has_all = fa.count("model.ckpt") && fa.count("report_clean.txt") &&
                             fa.count("eval_clean.csv") && fa.size() > 10;
        report(10, "determinism",
               {differing == 0 && has_all,
                std::to_string(fa.size()) + " files (checkpoint, label files, reports) compared, " +
                    std::to_string(differing) + " differ"});
      }
    } catch (const std::exception& e) {
      for (int k : {8, 9, 10}) {
        if (want(k)) report(k, "end-to-end", {false, std::string("exception: ") + e.what()});
      }
    }
  }
  std::printf("%s: %d failing criteria\n", failures ? "FAILED" : "PASSED", failures);
  return failures ? 1 : 0;
}
