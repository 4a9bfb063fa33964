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

// Differentiable operators for the dilated CNN.  Every function is pure:
// backward passes take whatever the forward computed (inputs, outputs or
// argmax routing) explicitly.  All outputs are checked for NaN/Inf before
// returning, so a numerical blow-up is reported by the operator that
// produced it.

#ifndef GCI_NN_OPS_HPP_
#define GCI_NN_OPS_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gci/nn/tensor.hpp"

namespace gci::nn {

inline constexpr double kSeluLambda = 1.0507009873554804934193349852946;
inline constexpr double kSeluAlpha = 1.6732632423543772848170429916717;

// Valid (unpadded), stride-1 dilated convolution.
//   x: [B, Cin, T]   w: [Cout, Cin, K]   bias: [Cout]
//   y: [B, Cout, T - (K-1)*dilation]
//   y[b,o,t] = bias[o] + sum_{c,k} w[o,c,k] * x[b,c,t + k*dilation]
Tensor conv1d_forward(const Tensor& x, const Tensor& w, const Tensor& bias,
                      std::size_t dilation);

struct Conv1dGrads {
  Tensor grad_x;  // empty when not requested
  Tensor grad_w;
  Tensor grad_b;
};

Conv1dGrads conv1d_backward(const Tensor& grad_out, const Tensor& x,
                            const Tensor& w, std::size_t dilation,
                            bool need_grad_x = true);

// Kernel 2, stride 2 max pooling along time.  An odd trailing sample is
// dropped.  argmax holds 0 or 1 per output (offset inside the pair); ties
// pick the earlier sample.
struct MaxPoolResult {
  Tensor output;
  std::vector<std::uint8_t> argmax;
};

MaxPoolResult maxpool_forward(const Tensor& x);
Tensor maxpool_backward(const Tensor& grad_out,
                        const std::vector<std::uint8_t>& argmax,
                        const Shape& input_shape);

double selu(double x);
Tensor selu(const Tensor& x);
Tensor selu_backward(const Tensor& x, const Tensor& grad_out);
void selu_inplace(Tensor& x);
// Same derivative computed from y = selu(x): lambda for y > 0, else
// y + lambda * alpha.  Avoids a second exponential.
Tensor selu_backward_from_output(const Tensor& y, const Tensor& grad_out);

// y = x W^T + b with x: [B, F], W: [O, F], b: [O].
Tensor dense_forward(const Tensor& x, const Tensor& w, const Tensor& bias);

struct DenseGrads {
  Tensor grad_x;
  Tensor grad_w;
  Tensor grad_b;
};

DenseGrads dense_backward(const Tensor& grad_out, const Tensor& x,
                          const Tensor& w);

double sigmoid(double x);
Tensor sigmoid(const Tensor& x);
// Takes the forward output y, not the input.
Tensor sigmoid_backward(const Tensor& y, const Tensor& grad_out);

// Pass-through clamped to [lo, hi].  Gradient is 1 strictly inside the
// interval and 0 at or beyond the bounds.
Tensor hardtanh_bounded(const Tensor& x, double lo, double hi);
Tensor hardtanh_bounded_backward(const Tensor& x, const Tensor& grad_out,
                                 double lo, double hi);

}  // namespace gci::nn

#endif  // GCI_NN_OPS_HPP_
