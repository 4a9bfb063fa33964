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

// Dilated-CNN closure detector.
//
// Feature extractor: num_conv_layers x [conv(K, dilation_i, C) -> SELU ->
// maxpool(2, 2)], all valid convolutions, so the time axis shrinks
// deterministically.  The output steps whose receptive fields are centred
// on the detection window are flattened and shared by two heads of the
// same shape:
//
//   classification: dense(H) -> SELU -> dense(1) -> sigmoid      = y_c
//   regression:     dense(H) -> SELU -> dense(1) -> clamp[0, wd] = y_r

#ifndef GCI_MODEL_HPP_
#define GCI_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gci/loss.hpp"
#include "gci/nn/adamax.hpp"
#include "gci/nn/ops.hpp"
#include "gci/nn/tensor.hpp"

namespace gci {

enum class InputScale { kNone, kPerFrameMaxAbs };

std::string to_string(InputScale s);
InputScale parse_input_scale(const std::string& s);

struct ModelConfig {
  std::size_t num_conv_layers = 4;
  std::size_t kernel_size = 5;
  std::size_t channels = 32;
  // Empty: dilation 2^i per layer, capped so every layer still leaves at
  // least two samples for its pooling stage.
  std::vector<std::size_t> dilations;
  std::size_t head_hidden = 64;
  std::size_t wd_samples = 32;
  std::size_t wi_samples = 192;
  InputScale input_scale = InputScale::kPerFrameMaxAbs;
  bool pooling = true;
  int sample_rate = 16000;

  std::size_t context_samples() const { return (wi_samples - wd_samples) / 2; }
  bool operator==(const ModelConfig&) const = default;
};

// --- receptive-field bookkeeping -----------------------------------------

struct Stage {
  enum class Kind { kConv, kPool } kind;
  std::size_t kernel = 1;
  std::size_t dilation = 1;
};

// Inclusive input-sample interval seen by one output step.
struct ReceptiveField {
  double start;
  double end;
  double center() const { return 0.5 * (start + end); }
};

// Output length of every stage for an input of `input_len` samples; throws
// ConfigError when a stage would leave a non-positive length (or fewer than
// two samples before a pooling stage).
std::vector<std::size_t> stage_lengths(std::span<const Stage> stages, std::size_t input_len);

std::vector<ReceptiveField> trace_receptive_fields(std::span<const Stage> stages,
                                                   std::size_t input_len);

struct CenterSlice {
  std::size_t first = 0;  // first selected output step
  std::size_t count = 0;  // S
};

// The contiguous output steps whose receptive-field centres lie in
// [context, context + wd).  When none does, the single step nearest the
// window centre is used, provided its centre lies inside the frame.
CenterSlice select_center_steps(std::span<const ReceptiveField> fields,
                                std::size_t context, std::size_t wd, std::size_t wi);

struct Geometry {
  std::vector<std::size_t> dilations;  // resolved
  std::vector<Stage> stages;
  std::vector<std::size_t> lengths;    // after each stage
  std::size_t out_len = 0;             // T_out of the feature extractor
  CenterSlice slice;
  std::size_t feature_dim = 0;         // channels * slice.count
};

// Resolves dilations and shapes by symbolic propagation through the stack.
Geometry resolve_geometry(const ModelConfig& cfg);

// [B, C, T_out] -> [B, C * S], channel-major.
nn::Tensor center_slice(const nn::Tensor& features, const CenterSlice& slice);
nn::Tensor center_slice_backward(const nn::Tensor& grad, const CenterSlice& slice,
                                 const nn::Shape& feature_shape);

// --- parameters ----------------------------------------------------------

struct ConvLayer {
  nn::Tensor w;  // [Cout, Cin, K]
  nn::Tensor b;  // [Cout]
  std::size_t dilation = 1;
  bool operator==(const ConvLayer&) const = default;
};

struct DenseLayer {
  nn::Tensor w;  // [O, F]
  nn::Tensor b;  // [O]
  bool operator==(const DenseLayer&) const = default;
};

struct Head {
  DenseLayer hidden;
  DenseLayer out;
  bool operator==(const Head&) const = default;
};

struct Model {
  ModelConfig config;
  Geometry geometry;
  std::vector<ConvLayer> conv;
  Head classifier;
  Head regressor;
  nn::AdamaxState optimizer;

  // Stable order: conv weight/bias per layer, then classifier and
  // regressor (hidden w, hidden b, out w, out b).
  std::vector<nn::Tensor*> parameters();
  std::vector<const nn::Tensor*> parameters() const;
  std::vector<std::string> parameter_names() const;
  std::size_t parameter_count() const;
};

Model build_model(const ModelConfig& cfg, std::uint64_t seed);

// Throws ConfigError if `a` and `b` disagree on frame geometry.
void check_compatible(const ModelConfig& model, std::size_t wd_samples,
                      std::size_t wi_samples, int sample_rate);

// --- forward / backward --------------------------------------------------

struct Outputs {
  std::vector<double> y_c;  // in (0, 1)
  std::vector<double> y_r;  // in [0, wd_samples]
};

// Applies the configured input scaling to frames laid out [B, wi] in place.
void scale_inputs(nn::Tensor& frames, InputScale scale);

// batch: [B, wi_samples] raw frames.
Outputs forward(const Model& model, const nn::Tensor& batch);

// Predictions from the feature-extractor output restricted to the centre
// slice, [B, feature_dim].  Shared by the frame-wise and whole-signal paths.
Outputs forward_heads(const Model& model, const nn::Tensor& features);

// One forward and backward pass of the joint loss.  `grads` receives one
// tensor per entry of model.parameters() (resized as needed).
LossTerms forward_backward(const Model& model, const nn::Tensor& batch,
                           std::span<const std::uint8_t> t_c, std::span<const double> t_r,
                           const LossWeights& weights, std::vector<nn::Tensor>& grads);

}  // namespace gci

#endif  // GCI_MODEL_HPP_
