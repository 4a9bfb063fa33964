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

#include "gci/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gci/error.hpp"
#include "gci/nn/init.hpp"

namespace gci {

using nn::Tensor;

std::string to_string(InputScale s) {
  return s == InputScale::kNone ? "none" : "max_abs";
}

InputScale parse_input_scale(const std::string& s) {
  if (s == "none") return InputScale::kNone;
  if (s == "max_abs" || s == "per_frame_max_abs") return InputScale::kPerFrameMaxAbs;
  throw ConfigError("unknown input_scale '" + s + "' (expected none or max_abs)");
}

// --- geometry --------------------------------------------------------------

std::vector<std::size_t> stage_lengths(std::span<const Stage> stages, std::size_t input_len) {
  std::vector<std::size_t> out;
  out.reserve(stages.size());
  std::size_t len = input_len;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const Stage& s = stages[i];
    if (s.kind == Stage::Kind::kConv) {
      const std::size_t span = (s.kernel - 1) * s.dilation + 1;
      if (len < span) {
        throw ConfigError("stage " + std::to_string(i) + ": conv span " +
                          std::to_string(span) + " exceeds time length " +
                          std::to_string(len));
      }
      len -= span - 1;
    } else {
      if (len < 2) {
        throw ConfigError("stage " + std::to_string(i) + ": pooling needs at least 2 steps, got " +
                          std::to_string(len));
      }
      len /= 2;
    }
    out.push_back(len);
  }
  return out;
}

std::vector<ReceptiveField> trace_receptive_fields(std::span<const Stage> stages,
                                                   std::size_t input_len) {
  const std::vector<std::size_t> lengths = stage_lengths(stages, input_len);
  const std::size_t out_len = lengths.empty() ? input_len : lengths.back();
  std::vector<ReceptiveField> fields(out_len);
  for (std::size_t t = 0; t < out_len; ++t) {
    std::size_t lo = t, hi = t;
    for (std::size_t i = stages.size(); i-- > 0;) {
      const Stage& s = stages[i];
      if (s.kind == Stage::Kind::kConv) {
        hi += (s.kernel - 1) * s.dilation;
      } else {
        lo = 2 * lo;
        hi = 2 * hi + 1;
      }
    }
    fields[t] = {static_cast<double>(lo), static_cast<double>(hi)};
  }
  return fields;
}

CenterSlice select_center_steps(std::span<const ReceptiveField> fields, std::size_t context,
                                std::size_t wd, std::size_t wi) {
  if (fields.empty()) throw ConfigError("center slice: feature extractor has no output steps");
  const double lo = static_cast<double>(context);
  const double hi = static_cast<double>(context + wd);
  CenterSlice slice;
  bool found = false;
  for (std::size_t t = 0; t < fields.size(); ++t) {
    const double c = fields[t].center();
    if (c >= lo && c < hi) {
      if (!found) slice.first = t;
      found = true;
      slice.count = t - slice.first + 1;
    }
  }
  if (found) return slice;

  const double mid = 0.5 * (lo + hi);
  std::size_t best = 0;
  for (std::size_t t = 1; t < fields.size(); ++t) {
    if (std::abs(fields[t].center() - mid) < std::abs(fields[best].center() - mid)) best = t;
  }
  const double c = fields[best].center();
  if (!(c >= 0.0 && c < static_cast<double>(wi))) {
    throw ConfigError("center slice: no output step is centred inside the frame");
  }
  return {best, 1};
}

Geometry resolve_geometry(const ModelConfig& cfg) {
  if (cfg.num_conv_layers == 0) throw ConfigError("model: num_conv_layers must be >= 1");
  if (cfg.kernel_size == 0) throw ConfigError("model: kernel_size must be >= 1");
  if (cfg.channels == 0 || cfg.head_hidden == 0) {
    throw ConfigError("model: channels and head_hidden must be >= 1");
  }
  if (cfg.wd_samples == 0 || cfg.wi_samples < cfg.wd_samples ||
      (cfg.wi_samples - cfg.wd_samples) % 2 != 0) {
    throw ConfigError("model: need wi_samples = wd_samples + 2 * context");
  }
  if (!cfg.dilations.empty() && cfg.dilations.size() != cfg.num_conv_layers) {
    throw ConfigError("model: " + std::to_string(cfg.dilations.size()) + " dilations for " +
                      std::to_string(cfg.num_conv_layers) + " conv layers");
  }

  Geometry g;
  const std::size_t k = cfg.kernel_size;
  const std::size_t keep = cfg.pooling ? 2 : 1;
  std::size_t len = cfg.wi_samples;
  for (std::size_t i = 0; i < cfg.num_conv_layers; ++i) {
    std::size_t d;
    if (!cfg.dilations.empty()) {
      d = cfg.dilations[i];
      if (d == 0) throw ConfigError("model: dilation must be >= 1");
    } else {
      d = std::size_t{1} << std::min<std::size_t>(i, 30);
      if (k > 1) {
        if (len < keep + (k - 1)) {
          throw ConfigError("model: layer " + std::to_string(i) + " does not fit time length " +
                            std::to_string(len));
        }
        d = std::min(d, (len - keep) / (k - 1));
      }
    }
    g.dilations.push_back(d);
    g.stages.push_back({Stage::Kind::kConv, k, d});
    const std::size_t span = (k - 1) * d + 1;
    if (len < span || len - (span - 1) < keep) {
      throw ConfigError("model: layer " + std::to_string(i) + " (K=" + std::to_string(k) +
                        ", d=" + std::to_string(d) + ") leaves no time steps from length " +
                        std::to_string(len));
    }
    len -= span - 1;
    if (cfg.pooling) {
      g.stages.push_back({Stage::Kind::kPool, 2, 1});
      len /= 2;
    }
  }
  g.lengths = stage_lengths(g.stages, cfg.wi_samples);
  g.out_len = g.lengths.back();
  const auto fields = trace_receptive_fields(g.stages, cfg.wi_samples);
  g.slice = select_center_steps(fields, cfg.context_samples(), cfg.wd_samples, cfg.wi_samples);
  g.feature_dim = cfg.channels * g.slice.count;
  return g;
}

Tensor center_slice(const Tensor& features, const CenterSlice& slice) {
  if (features.rank() != 3 || slice.first + slice.count > features.dim(2)) {
    throw ConfigError("center_slice: features " + nn::shape_string(features.shape()) +
                      " do not cover the slice");
  }
  const std::size_t b = features.dim(0), c = features.dim(1), t = features.dim(2);
  Tensor out({b, c * slice.count});
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double* src = features.data() + (i * c + ch) * t + slice.first;
      std::copy(src, src + slice.count, out.data() + (i * c + ch) * slice.count);
    }
  }
  return out;
}

Tensor center_slice_backward(const Tensor& grad, const CenterSlice& slice,
                             const nn::Shape& feature_shape) {
  const std::size_t b = feature_shape.at(0), c = feature_shape.at(1), t = feature_shape.at(2);
  nn::expect_shape(grad, {b, c * slice.count}, "center_slice_backward");
  Tensor out(feature_shape);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double* src = grad.data() + (i * c + ch) * slice.count;
      std::copy(src, src + slice.count, out.data() + (i * c + ch) * t + slice.first);
    }
  }
  return out;
}

// --- parameters ------------------------------------------------------------

std::vector<Tensor*> Model::parameters() {
  std::vector<Tensor*> p;
  for (ConvLayer& l : conv) {
    p.push_back(&l.w);
    p.push_back(&l.b);
  }
  for (Head* h : {&classifier, &regressor}) {
    p.push_back(&h->hidden.w);
    p.push_back(&h->hidden.b);
    p.push_back(&h->out.w);
    p.push_back(&h->out.b);
  }
  return p;
}

std::vector<const Tensor*> Model::parameters() const {
  std::vector<Tensor*> mut = const_cast<Model*>(this)->parameters();
  return {mut.begin(), mut.end()};
}

std::vector<std::string> Model::parameter_names() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < conv.size(); ++i) {
    names.push_back("conv" + std::to_string(i) + ".w");
    names.push_back("conv" + std::to_string(i) + ".b");
  }
  for (const char* h : {"cls", "reg"}) {
    for (const char* part : {".hidden.w", ".hidden.b", ".out.w", ".out.b"}) {
      names.push_back(std::string(h) + part);
    }
  }
  return names;
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor* t : parameters()) n += t->size();
  return n;
}

namespace {

Head make_head(std::size_t features, std::size_t hidden, std::mt19937_64& rng) {
  Head h;
  h.hidden.w = nn::selu_init({hidden, features}, features, rng);
  h.hidden.b = nn::zero_bias(hidden);
  h.out.w = nn::selu_init({1, hidden}, hidden, rng);
  h.out.b = nn::zero_bias(1);
  return h;
}

}  // namespace

Model build_model(const ModelConfig& cfg, std::uint64_t seed) {
  if (cfg.sample_rate <= 0) throw ConfigError("model: sample rate must be positive");
  Model m;
  m.config = cfg;
  m.geometry = resolve_geometry(cfg);
  std::mt19937_64 rng(seed);
  std::size_t in_ch = 1;
  for (std::size_t d : m.geometry.dilations) {
    ConvLayer l;
    l.w = nn::selu_init({cfg.channels, in_ch, cfg.kernel_size}, in_ch * cfg.kernel_size, rng);
    l.b = nn::zero_bias(cfg.channels);
    l.dilation = d;
    m.conv.push_back(std::move(l));
    in_ch = cfg.channels;
  }
  m.classifier = make_head(m.geometry.feature_dim, cfg.head_hidden, rng);
  m.regressor = make_head(m.geometry.feature_dim, cfg.head_hidden, rng);
  auto params = m.parameters();
  m.optimizer = nn::make_adamax_state(params);
  return m;
}

void check_compatible(const ModelConfig& model, std::size_t wd_samples, std::size_t wi_samples,
                      int sample_rate) {
  if (model.wd_samples != wd_samples || model.wi_samples != wi_samples ||
      model.sample_rate != sample_rate) {
    throw ConfigError("config conflict: model expects wd=" + std::to_string(model.wd_samples) +
                      " wi=" + std::to_string(model.wi_samples) + " samples at " +
                      std::to_string(model.sample_rate) + " Hz, requested wd=" +
                      std::to_string(wd_samples) + " wi=" + std::to_string(wi_samples) +
                      " at " + std::to_string(sample_rate) + " Hz");
  }
}

// --- forward / backward ----------------------------------------------------

void scale_inputs(Tensor& frames, InputScale scale) {
  if (scale == InputScale::kNone) return;
  const std::size_t len = frames.dim(frames.rank() - 1);
  const std::size_t rows = frames.size() / len;
  for (std::size_t r = 0; r < rows; ++r) {
    double* f = frames.data() + r * len;
    double peak = 0.0;
    for (std::size_t i = 0; i < len; ++i) peak = std::max(peak, std::abs(f[i]));
    if (peak > 0.0) {
      const double inv = 1.0 / peak;
      for (std::size_t i = 0; i < len; ++i) f[i] *= inv;
    }
  }
}

namespace {

struct LayerTrace {
  Tensor input;                     // conv input
  Tensor act;                       // SELU output, before pooling
  std::vector<std::uint8_t> argmax; // pooling routing
  nn::Shape act_shape;              // SELU output shape
};

struct HeadTrace {
  Tensor h;   // hidden pre-activation
  Tensor s;   // SELU(h)
  Tensor o;   // output pre-activation [B, 1]
};

Tensor prepare_batch(const Model& model, const Tensor& batch) {
  if (batch.rank() != 2 || batch.dim(1) != model.config.wi_samples) {
    throw ConfigError("forward: expected frames [B, " + std::to_string(model.config.wi_samples) +
                      "], got " + nn::shape_string(batch.shape()));
  }
  if (batch.dim(0) == 0) throw ConfigError("forward: empty batch");
  Tensor x = batch;
  scale_inputs(x, model.config.input_scale);
  x.reshape({batch.dim(0), 1, batch.dim(1)});
  return x;
}

Tensor extract(const Model& model, Tensor x, std::vector<LayerTrace>* trace) {
  for (const ConvLayer& l : model.conv) {
    Tensor a = nn::conv1d_forward(x, l.w, l.b, l.dilation);
    nn::selu_inplace(a);
    LayerTrace lt;
    lt.act_shape = a.shape();
    Tensor next;
    if (model.config.pooling) {
      nn::MaxPoolResult p = nn::maxpool_forward(a);
      next = std::move(p.output);
      lt.argmax = std::move(p.argmax);
    }
    if (trace) {
      lt.input = std::move(x);
      if (model.config.pooling) {
        lt.act = std::move(a);
      } else {
        lt.act = a;
      }
      trace->push_back(std::move(lt));
    }
    x = model.config.pooling ? std::move(next) : std::move(a);
  }
  return x;
}

Tensor run_head(const Head& head, const Tensor& features, HeadTrace* trace) {
  Tensor h = nn::dense_forward(features, head.hidden.w, head.hidden.b);
  Tensor s = nn::selu(h);
  Tensor o = nn::dense_forward(s, head.out.w, head.out.b);
  if (trace) {
    trace->h = std::move(h);
    trace->s = std::move(s);
    trace->o = o;
  }
  return o;
}

// Returns the gradient w.r.t. the features; writes the four head gradients.
Tensor head_backward(const Head& head, const Tensor& features, const HeadTrace& tr,
                     const Tensor& grad_o, Tensor* g) {
  nn::DenseGrads out = nn::dense_backward(grad_o, tr.s, head.out.w);
  Tensor grad_h = nn::selu_backward_from_output(tr.s, out.grad_x);
  nn::DenseGrads hid = nn::dense_backward(grad_h, features, head.hidden.w);
  g[0] = std::move(hid.grad_w);
  g[1] = std::move(hid.grad_b);
  g[2] = std::move(out.grad_w);
  g[3] = std::move(out.grad_b);
  return std::move(hid.grad_x);
}

}  // namespace

Outputs forward_heads(const Model& model, const Tensor& features) {
  nn::expect_shape(features, {features.dim(0), model.geometry.feature_dim}, "forward_heads");
  const Tensor oc = run_head(model.classifier, features, nullptr);
  const Tensor orr = run_head(model.regressor, features, nullptr);
  const Tensor yc = nn::sigmoid(oc);
  const Tensor yr =
      nn::hardtanh_bounded(orr, 0.0, static_cast<double>(model.config.wd_samples));
  return {{yc.values().begin(), yc.values().end()}, {yr.values().begin(), yr.values().end()}};
}

Outputs forward(const Model& model, const Tensor& batch) {
  Tensor feats = extract(model, prepare_batch(model, batch), nullptr);
  return forward_heads(model, center_slice(feats, model.geometry.slice));
}

LossTerms forward_backward(const Model& model, const Tensor& batch,
                           std::span<const std::uint8_t> t_c, std::span<const double> t_r,
                           const LossWeights& weights, std::vector<Tensor>& grads) {
  const std::size_t n = batch.rank() == 2 ? batch.dim(0) : 0;
  if (t_c.size() != n || t_r.size() != n) {
    throw ConfigError("forward_backward: target count does not match batch");
  }
  std::vector<LayerTrace> trace;
  const Tensor feats = extract(model, prepare_batch(model, batch), &trace);
  const Tensor flat = center_slice(feats, model.geometry.slice);

  HeadTrace ct, rt;
  run_head(model.classifier, flat, &ct);
  run_head(model.regressor, flat, &rt);
  const Tensor yc = nn::sigmoid(ct.o);
  const double wd = static_cast<double>(model.config.wd_samples);
  const Tensor yr = nn::hardtanh_bounded(rt.o, 0.0, wd);

  JointLoss loss = joint_loss(yc.values(), yr.values(), t_c, t_r, weights);

  const std::size_t conv_params = 2 * model.conv.size();
  grads.resize(conv_params + 8);

  const Tensor gyc({n, 1}, std::move(loss.grad_y_c));
  const Tensor gyr({n, 1}, std::move(loss.grad_y_r));
  Tensor g_flat = head_backward(model.classifier, flat, ct, nn::sigmoid_backward(yc, gyc),
                                &grads[conv_params]);
  const Tensor g_flat_r =
      head_backward(model.regressor, flat, rt, nn::hardtanh_bounded_backward(rt.o, gyr, 0.0, wd),
                    &grads[conv_params + 4]);
  for (std::size_t i = 0; i < g_flat.size(); ++i) g_flat[i] += g_flat_r[i];

  Tensor g = center_slice_backward(g_flat, model.geometry.slice, feats.shape());
  for (std::size_t i = model.conv.size(); i-- > 0;) {
    LayerTrace& lt = trace[i];
    if (model.config.pooling) g = nn::maxpool_backward(g, lt.argmax, lt.act_shape);
    g = nn::selu_backward_from_output(lt.act, g);
    nn::Conv1dGrads cg = nn::conv1d_backward(g, lt.input, model.conv[i].w, model.conv[i].dilation,
                                             /*need_grad_x=*/i > 0);
    grads[2 * i] = std::move(cg.grad_w);
    grads[2 * i + 1] = std::move(cg.grad_b);
    g = std::move(cg.grad_x);
  }
  return loss.terms;
}

}  // namespace gci
