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

#include "gci/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "gci/error.hpp"
#include "gci/nn/ops.hpp"

namespace gci {

using nn::Tensor;

void ClusterConfig::validate() const {
  if (bin_size == 0) throw ConfigError("cluster: bin_size must be >= 1");
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("cluster: threshold must be in (0, 1)");
  if (inference_shift < 1) throw ConfigError("cluster: inference_shift must be >= 1");
  if (prune_low_mass && !(min_group_mass >= 0.0)) {
    throw ConfigError("cluster: min_group_mass must be >= 0");
  }
}

namespace {

constexpr std::size_t kFrameBatch = 256;

Outputs frame_wise(const Model& model, const Waveform& w, std::size_t n_orig, std::size_t shift) {
  const std::size_t wi = model.config.wi_samples;
  Outputs out;
  std::vector<std::size_t> origins;
  for (std::size_t o = 0; o < n_orig; o += shift) origins.push_back(o);
  out.y_c.reserve(origins.size());
  out.y_r.reserve(origins.size());
  for (std::size_t start = 0; start < origins.size(); start += kFrameBatch) {
    const std::size_t n = std::min(kFrameBatch, origins.size() - start);
    Tensor batch({n, wi});
    for (std::size_t i = 0; i < n; ++i) {
      const double* src = w.samples.data() + origins[start + i];
      std::copy(src, src + wi, batch.data() + i * wi);
    }
    const Outputs o = forward(model, batch);
    out.y_c.insert(out.y_c.end(), o.y_c.begin(), o.y_c.end());
    out.y_r.insert(out.y_r.end(), o.y_r.begin(), o.y_r.end());
  }
  return out;
}

// Conv, SELU and valid stride-1 steps commute with shifting the frame, so
// one feature map over a whole chunk serves every frame in it.  A pooling
// stage does not: frames starting at even and odd positions pool different
// pairs.  Each pooling level therefore splits the map into two phases; a
// frame at chunk offset o = phase + 2^L j reads the leaf map at j.
class WholeSignal {
 public:
  WholeSignal(const Model& model, Outputs& out, std::size_t n_orig, std::size_t shift)
      : model_(model), out_(out), n_orig_(n_orig), shift_(shift) {}

  void run_chunk(const std::vector<double>& samples, std::size_t o0, std::size_t n_o) {
    const std::size_t wi = model_.config.wi_samples;
    Tensor x({1, 1, n_o - 1 + wi});
    std::copy(samples.begin() + static_cast<std::ptrdiff_t>(o0),
              samples.begin() + static_cast<std::ptrdiff_t>(o0 + n_o - 1 + wi), x.data());
    o0_ = o0;
    n_o_ = n_o;
    descend(0, std::move(x), 0, 1);
  }

 private:
  void descend(std::size_t layer, Tensor x, std::size_t phase, std::size_t stride) {
    if (layer == model_.conv.size()) {
      leaf(x, phase, stride);
      return;
    }
    const ConvLayer& l = model_.conv[layer];
    Tensor a = nn::conv1d_forward(x, l.w, l.b, l.dilation);
    x = Tensor();
    nn::selu_inplace(a);
    if (!model_.config.pooling) {
      descend(layer + 1, std::move(a), phase, stride);
      return;
    }
    const std::size_t c = a.dim(1), t = a.dim(2);
    // Phase 1 reads pairs (1,2), (3,4), ...; only worth building when some
    // frame starts there.
    if (phase + stride < n_o_ && t >= 3) {
      Tensor shifted({1, c, t - 1});
      for (std::size_t ch = 0; ch < c; ++ch) {
        std::copy(a.data() + ch * t + 1, a.data() + (ch + 1) * t, shifted.data() + ch * (t - 1));
      }
      descend(layer + 1, nn::maxpool_forward(shifted).output, phase + stride, stride * 2);
    }
    descend(layer + 1, nn::maxpool_forward(a).output, phase, stride * 2);
  }

  void leaf(const Tensor& f, std::size_t phase, std::size_t stride) {
    const CenterSlice& s = model_.geometry.slice;
    const std::size_t c = f.dim(1), t = f.dim(2);
    std::vector<std::size_t> js;
    for (std::size_t o = phase; o < n_o_; o += stride) {
      if ((o0_ + o) % shift_ == 0) js.push_back((o - phase) / stride);
    }
    for (std::size_t start = 0; start < js.size(); start += kFrameBatch) {
      const std::size_t n = std::min(kFrameBatch, js.size() - start);
      Tensor feats({n, c * s.count});
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = js[start + i];
        if (j + s.first + s.count > t) throw Error("whole-signal inference: leaf map too short");
        for (std::size_t ch = 0; ch < c; ++ch) {
          const double* src = f.data() + ch * t + j + s.first;
          std::copy(src, src + s.count, feats.data() + (i * c + ch) * s.count);
        }
      }
      const Outputs o = forward_heads(model_, feats);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t origin = o0_ + phase + stride * js[start + i];
        out_.y_c[origin / shift_] = o.y_c[i];
        out_.y_r[origin / shift_] = o.y_r[i];
      }
    }
  }

  const Model& model_;
  Outputs& out_;
  std::size_t n_orig_;
  std::size_t shift_;
  std::size_t o0_ = 0;
  std::size_t n_o_ = 0;
};

Outputs whole_signal(const Model& model, const Waveform& w, std::size_t n_orig, std::size_t shift) {
  const std::size_t n_out = (n_orig + shift - 1) / shift;
  Outputs out;
  out.y_c.assign(n_out, 0.0);
  out.y_r.assign(n_out, 0.0);
  const std::size_t period =
      model.config.pooling ? std::size_t{1} << std::min<std::size_t>(model.conv.size(), 20) : 1;
  // Chunks keep the level-0 feature map to a few megabytes.
  const std::size_t chunk = period * std::max<std::size_t>(1, 8192 / period);
  WholeSignal ws(model, out, n_orig, shift);
  for (std::size_t o0 = 0; o0 < n_orig; o0 += chunk) {
    ws.run_chunk(w.samples, o0, std::min(chunk, n_orig - o0));
  }
  return out;
}

}  // namespace

Outputs score_frames(const Model& model, const Waveform& w, std::int64_t shift,
                     InferencePath path) {
  require_valid(w, "inference");
  if (shift < 1) throw ConfigError("inference: shift must be >= 1");
  if (w.sample_rate != model.config.sample_rate) {
    throw ConfigError("config conflict: model trained at " + std::to_string(model.config.sample_rate) +
                      " Hz, signal is " + std::to_string(w.sample_rate) + " Hz");
  }
  const std::size_t wi = model.config.wi_samples;
  if (w.samples.size() < wi) {
    throw DataError("inference: signal of " + std::to_string(w.samples.size()) +
                    " samples is shorter than one frame (" + std::to_string(wi) + ")");
  }
  const std::size_t n_orig = w.samples.size() - wi + 1;
  const auto step = static_cast<std::size_t>(shift);
  if (path == InferencePath::kAuto) {
    path = model.config.input_scale == InputScale::kNone ? InferencePath::kWholeSignal
                                                         : InferencePath::kFrameWise;
  }
  if (path == InferencePath::kWholeSignal) {
    if (model.config.input_scale != InputScale::kNone) {
      throw ConfigError("whole-signal inference needs input_scale = none");
    }
    return whole_signal(model, w, n_orig, step);
  }
  return frame_wise(model, w, n_orig, step);
}

std::vector<CandidateGci> predict_candidates(const Model& model, const Waveform& w,
                                             const ClusterConfig& cfg, InferencePath path) {
  cfg.validate();
  const Outputs o = score_frames(model, w, cfg.inference_shift, path);
  const double ctx = static_cast<double>(model.config.context_samples());
  std::vector<CandidateGci> cands;
  for (std::size_t i = 0; i < o.y_c.size(); ++i) {
    if (o.y_c[i] >= cfg.threshold) {
      const double origin = static_cast<double>(i) * static_cast<double>(cfg.inference_shift);
      cands.push_back({origin + ctx + o.y_r[i], o.y_c[i]});
    }
  }
  std::stable_sort(cands.begin(), cands.end(),
                   [](const CandidateGci& a, const CandidateGci& b) { return a.location < b.location; });
  return cands;
}

namespace {

std::size_t bin_of(const CandidateGci& c, std::size_t bin_size, std::size_t signal_length) {
  if (!(c.location >= 0.0 && c.location < static_cast<double>(signal_length))) {
    throw DataError("candidate at " + std::to_string(c.location) + " lies outside the signal [0, " +
                    std::to_string(signal_length) + ")");
  }
  return static_cast<std::size_t>(std::floor(c.location)) / bin_size;
}

}  // namespace

std::vector<double> candidate_histogram(std::span<const CandidateGci> cands, std::size_t bin_size,
                                        std::size_t signal_length) {
  if (bin_size == 0) throw ConfigError("cluster: bin_size must be >= 1");
  std::vector<double> hist((signal_length + bin_size - 1) / bin_size, 0.0);
  for (const CandidateGci& c : cands) hist[bin_of(c, bin_size, signal_length)] += c.probability;
  return hist;
}

GciLabels cluster_candidates(std::span<const CandidateGci> cands, const ClusterConfig& cfg,
                             std::size_t signal_length) {
  cfg.validate();
  if (cands.empty()) return {};
  const std::vector<double> hist = candidate_histogram(cands, cfg.bin_size, signal_length);

  // Group id per bin: runs of non-empty bins.
  std::vector<std::int64_t> group(hist.size(), -1);
  std::int64_t groups = 0;
  for (std::size_t b = 0; b < hist.size(); ++b) {
    if (hist[b] > 0.0) group[b] = (b > 0 && group[b - 1] >= 0) ? group[b - 1] : groups++;
  }
  std::vector<double> mass(static_cast<std::size_t>(groups), 0.0);
  std::vector<double> moment(static_cast<std::size_t>(groups), 0.0);
  for (const CandidateGci& c : cands) {
    const std::int64_t g = group[bin_of(c, cfg.bin_size, signal_length)];
    if (g < 0) continue;  // zero-probability candidate in an empty bin
    mass[static_cast<std::size_t>(g)] += c.probability;
    moment[static_cast<std::size_t>(g)] += c.probability * c.location;
  }
  std::vector<std::int64_t> marks;
  for (std::size_t g = 0; g < mass.size(); ++g) {
    if (cfg.prune_low_mass && mass[g] < cfg.min_group_mass) continue;
    const std::int64_t m = std::llround(moment[g] / mass[g]);
    if (marks.empty() || m > marks.back()) marks.push_back(m);
  }
  return GciLabels(std::move(marks));
}

GciLabels detect(const Model& model, const Waveform& w, const ClusterConfig& cfg,
                 std::vector<CandidateGci>* candidates_out) {
  std::vector<CandidateGci> cands = predict_candidates(model, w, cfg);
  GciLabels labels = cluster_candidates(cands, cfg, w.samples.size());
  if (candidates_out) *candidates_out = std::move(cands);
  return labels;
}

void write_candidates(std::span<const CandidateGci> cands, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  char line[64];
  for (const CandidateGci& c : cands) {
    std::snprintf(line, sizeof line, "%.6f %.6f\n", c.location, c.probability);
    os << line;
  }
  if (!os) throw IoError("failed writing " + path.string());
}

}  // namespace gci
