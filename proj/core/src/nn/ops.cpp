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

#include "gci/nn/ops.hpp"

#include <algorithm>
#include <array>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "gci/error.hpp"

namespace gci::nn {
namespace {

constexpr std::size_t kOutBlock = 4;
constexpr std::size_t kLanes = 4;
constexpr std::size_t kVecPerTile = 2;
constexpr std::size_t kTimeBlock = kLanes * kVecPerTile;

typedef double Vec4 __attribute__((vector_size(32)));

inline Vec4 load4(const double* p) {
  Vec4 v;
  std::memcpy(&v, p, sizeof(v));
  return v;
}
inline void store4(double* p, Vec4 v) { std::memcpy(p, &v, sizeof(v)); }
inline Vec4 splat4(double a) { return Vec4{a, a, a, a}; }
inline double hsum4(Vec4 v) { return (v[0] + v[1]) + (v[2] + v[3]); }

// Accumulates an (OB x kTimeBlock) tile of the convolution output.  Every
// output element is summed in the same (c, k) order whatever the tile
// geometry, so a long signal and a short frame produce the same values at
// corresponding positions.
template <std::size_t OB>
inline void conv_tile(const double* x, std::size_t cin, std::size_t t_in,
                      const double* w, const double* bias, std::size_t o0,
                      std::size_t kernel, std::size_t dilation, double* y,
                      std::size_t t_out, std::size_t t0) {
  Vec4 acc[OB][kVecPerTile];
  for (std::size_t i = 0; i < OB; ++i) {
    for (std::size_t j = 0; j < kVecPerTile; ++j) acc[i][j] = splat4(bias[o0 + i]);
  }
  for (std::size_t c = 0; c < cin; ++c) {
    const double* xc = x + c * t_in + t0;
    for (std::size_t k = 0; k < kernel; ++k) {
      const double* xp = xc + k * dilation;
      Vec4 xv[kVecPerTile];
      for (std::size_t j = 0; j < kVecPerTile; ++j) xv[j] = load4(xp + kLanes * j);
      for (std::size_t i = 0; i < OB; ++i) {
        const Vec4 wv = splat4(w[((o0 + i) * cin + c) * kernel + k]);
        for (std::size_t j = 0; j < kVecPerTile; ++j) acc[i][j] += wv * xv[j];
      }
    }
  }
  for (std::size_t i = 0; i < OB; ++i) {
    for (std::size_t j = 0; j < kVecPerTile; ++j) {
      store4(y + (o0 + i) * t_out + t0 + kLanes * j, acc[i][j]);
    }
  }
}

// One batch item: x [cin, t_in] -> y [cout, t_out].  The ragged end of each
// row is computed by the same tile on a zero-padded copy of the inputs it
// reads, which keeps the per-element summation order identical.
void conv_single(const double* x, std::size_t cin, std::size_t t_in,
                 const double* w, const double* bias, std::size_t cout,
                 std::size_t kernel, std::size_t dilation, double* y,
                 std::size_t t_out) {
  const std::size_t t_full = t_out - t_out % kTimeBlock;
  std::size_t o0 = 0;
  for (; o0 + kOutBlock <= cout; o0 += kOutBlock) {
    for (std::size_t t0 = 0; t0 < t_full; t0 += kTimeBlock) {
      conv_tile<kOutBlock>(x, cin, t_in, w, bias, o0, kernel, dilation, y,
                           t_out, t0);
    }
  }
  for (std::size_t o = o0; o < cout; ++o) {
    for (std::size_t t0 = 0; t0 < t_full; t0 += kTimeBlock) {
      conv_tile<1>(x, cin, t_in, w, bias, o, kernel, dilation, y, t_out, t0);
    }
  }
  if (t_full == t_out) return;

  const std::size_t tail = t_out - t_full;
  const std::size_t reach = (kernel - 1) * dilation;
  const std::size_t scratch_in = kTimeBlock + reach;
  thread_local std::vector<double> xs, ys;
  xs.assign(cin * scratch_in, 0.0);
  ys.assign(cout * kTimeBlock, 0.0);
  for (std::size_t c = 0; c < cin; ++c) {
    std::copy(x + c * t_in + t_full, x + c * t_in + t_in,
              xs.begin() + c * scratch_in);
  }
  std::size_t q = 0;
  for (; q + kOutBlock <= cout; q += kOutBlock) {
    conv_tile<kOutBlock>(xs.data(), cin, scratch_in, w, bias, q, kernel,
                         dilation, ys.data(), kTimeBlock, 0);
  }
  for (; q < cout; ++q) {
    conv_tile<1>(xs.data(), cin, scratch_in, w, bias, q, kernel, dilation,
                 ys.data(), kTimeBlock, 0);
  }
  for (std::size_t o = 0; o < cout; ++o) {
    std::copy(ys.begin() + o * kTimeBlock, ys.begin() + o * kTimeBlock + tail,
              y + o * t_out + t_full);
  }
}

// grad_w[o0+i, c, k] += sum_t g[o0+i, t] * x[c, t + k*dilation] for a block
// of output channels; reuses each input load across the block.
template <std::size_t OB>
inline void weight_grad_block(const double* g, const double* x,
                              std::size_t cin, std::size_t t_in,
                              std::size_t t_out, std::size_t kernel,
                              std::size_t dilation, std::size_t o0,
                              double* grad_w) {
  const std::size_t t_vec = t_out - t_out % kLanes;
  for (std::size_t c = 0; c < cin; ++c) {
    for (std::size_t k = 0; k < kernel; ++k) {
      const double* xp = x + c * t_in + k * dilation;
      Vec4 acc[OB];
      for (std::size_t i = 0; i < OB; ++i) acc[i] = splat4(0.0);
      for (std::size_t t = 0; t < t_vec; t += kLanes) {
        const Vec4 xv = load4(xp + t);
        for (std::size_t i = 0; i < OB; ++i) acc[i] += load4(g + (o0 + i) * t_out + t) * xv;
      }
      for (std::size_t i = 0; i < OB; ++i) {
        double tail = 0.0;
        for (std::size_t t = t_vec; t < t_out; ++t) tail += g[(o0 + i) * t_out + t] * xp[t];
        grad_w[((o0 + i) * cin + c) * kernel + k] += hsum4(acc[i]) + tail;
      }
    }
  }
}

// Deterministic dot product with eight interleaved partial sums.
inline double dot(const double* a, const double* b, std::size_t n) {
  double part[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t l = 0; l < 8; ++l) part[l] += a[i + l] * b[i + l];
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return ((part[0] + part[1]) + (part[2] + part[3])) +
         ((part[4] + part[5]) + (part[6] + part[7])) + tail;
}

inline double sum(const double* a, std::size_t n) {
  double part[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t l = 0; l < 8; ++l) part[l] += a[i + l];
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i];
  return ((part[0] + part[1]) + (part[2] + part[3])) +
         ((part[4] + part[5]) + (part[6] + part[7])) + tail;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

Tensor conv1d_forward(const Tensor& x, const Tensor& w, const Tensor& bias,
                      std::size_t dilation) {
  require(x.rank() == 3, "conv1d_forward: input must be [B,Cin,T], got " +
                             shape_string(x.shape()));
  require(w.rank() == 3, "conv1d_forward: weights must be [Cout,Cin,K], got " +
                             shape_string(w.shape()));
  require(dilation >= 1, "conv1d_forward: dilation must be >= 1");
  const std::size_t batch = x.dim(0), cin = x.dim(1), t_in = x.dim(2);
  const std::size_t cout = w.dim(0), kernel = w.dim(2);
  require(w.dim(1) == cin, "conv1d_forward: channel mismatch, input " +
                               shape_string(x.shape()) + " weights " +
                               shape_string(w.shape()));
  require(kernel >= 1, "conv1d_forward: kernel size must be >= 1");
  require(bias.rank() == 1 && bias.dim(0) == cout,
          "conv1d_forward: bias must be [Cout]");
  const std::size_t span = (kernel - 1) * dilation + 1;
  require(t_in >= span, "conv1d_forward: input length " + std::to_string(t_in) +
                            " shorter than dilated kernel span " +
                            std::to_string(span));
  const std::size_t t_out = t_in - (kernel - 1) * dilation;

  Tensor y({batch, cout, t_out});
  for (std::size_t b = 0; b < batch; ++b) {
    conv_single(x.data() + b * cin * t_in, cin, t_in, w.data(), bias.data(),
                cout, kernel, dilation, y.data() + b * cout * t_out, t_out);
  }
  check_finite(y, "conv1d_forward");
  return y;
}

Conv1dGrads conv1d_backward(const Tensor& grad_out, const Tensor& x,
                            const Tensor& w, std::size_t dilation,
                            bool need_grad_x) {
  require(x.rank() == 3 && w.rank() == 3 && grad_out.rank() == 3,
          "conv1d_backward: expected rank-3 tensors");
  const std::size_t batch = x.dim(0), cin = x.dim(1), t_in = x.dim(2);
  const std::size_t cout = w.dim(0), kernel = w.dim(2);
  require(w.dim(1) == cin, "conv1d_backward: channel mismatch");
  require(t_in >= (kernel - 1) * dilation + 1,
          "conv1d_backward: input shorter than kernel span");
  const std::size_t t_out = t_in - (kernel - 1) * dilation;
  require(grad_out.dim(0) == batch && grad_out.dim(1) == cout &&
              grad_out.dim(2) == t_out,
          "conv1d_backward: grad_out shape " + shape_string(grad_out.shape()) +
              " inconsistent with forward output [" + std::to_string(batch) +
              "," + std::to_string(cout) + "," + std::to_string(t_out) + "]");

  Conv1dGrads g;
  g.grad_w = Tensor({cout, cin, kernel});
  g.grad_b = Tensor({cout});

  for (std::size_t b = 0; b < batch; ++b) {
    const double* gb = grad_out.data() + b * cout * t_out;
    const double* xb = x.data() + b * cin * t_in;
    for (std::size_t o = 0; o < cout; ++o) g.grad_b[o] += sum(gb + o * t_out, t_out);
    std::size_t o0 = 0;
    for (; o0 + kOutBlock <= cout; o0 += kOutBlock) {
      weight_grad_block<kOutBlock>(gb, xb, cin, t_in, t_out, kernel, dilation,
                                   o0, g.grad_w.data());
    }
    for (; o0 < cout; ++o0) {
      weight_grad_block<1>(gb, xb, cin, t_in, t_out, kernel, dilation, o0,
                           g.grad_w.data());
    }
  }

  if (need_grad_x) {
    // grad_x is the valid convolution of the zero-padded output gradient
    // with the time-reversed, channel-transposed kernel.
    const std::size_t pad = (kernel - 1) * dilation;
    const std::size_t t_pad = t_out + 2 * pad;
    Tensor flipped({cin, cout, kernel});
    for (std::size_t o = 0; o < cout; ++o) {
      for (std::size_t c = 0; c < cin; ++c) {
        for (std::size_t k = 0; k < kernel; ++k) {
          flipped.at(c, o, kernel - 1 - k) = w.at(o, c, k);
        }
      }
    }
    const std::vector<double> zero_bias(cin, 0.0);
    std::vector<double> padded(cout * t_pad, 0.0);
    g.grad_x = Tensor({batch, cin, t_in});
    for (std::size_t b = 0; b < batch; ++b) {
      const double* gb = grad_out.data() + b * cout * t_out;
      for (std::size_t o = 0; o < cout; ++o) {
        std::copy(gb + o * t_out, gb + (o + 1) * t_out,
                  padded.begin() + o * t_pad + pad);
      }
      conv_single(padded.data(), cout, t_pad, flipped.data(), zero_bias.data(),
                  cin, kernel, dilation, g.grad_x.data() + b * cin * t_in,
                  t_in);
    }
    check_finite(g.grad_x, "conv1d_backward");
  }
  check_finite(g.grad_w, "conv1d_backward");
  check_finite(g.grad_b, "conv1d_backward");
  return g;
}

MaxPoolResult maxpool_forward(const Tensor& x) {
  require(x.rank() == 3, "maxpool_forward: input must be [B,C,T]");
  const std::size_t rows = x.dim(0) * x.dim(1), t_in = x.dim(2);
  require(t_in >= 2, "maxpool_forward: time length " + std::to_string(t_in) +
                         " < 2");
  const std::size_t t_out = t_in / 2;
  MaxPoolResult r;
  r.output = Tensor({x.dim(0), x.dim(1), t_out});
  r.argmax.resize(rows * t_out);
  for (std::size_t row = 0; row < rows; ++row) {
    const double* xr = x.data() + row * t_in;
    double* yr = r.output.data() + row * t_out;
    std::uint8_t* ar = r.argmax.data() + row * t_out;
    for (std::size_t t = 0; t < t_out; ++t) {
      const double a = xr[2 * t], b = xr[2 * t + 1];
      const bool second = b > a;
      yr[t] = second ? b : a;
      ar[t] = second ? 1 : 0;
    }
  }
  check_finite(r.output, "maxpool_forward");
  return r;
}

Tensor maxpool_backward(const Tensor& grad_out,
                        const std::vector<std::uint8_t>& argmax,
                        const Shape& input_shape) {
  require(input_shape.size() == 3 && grad_out.rank() == 3,
          "maxpool_backward: expected rank-3 shapes");
  const std::size_t t_in = input_shape[2], t_out = t_in / 2;
  require(grad_out.dim(0) == input_shape[0] &&
              grad_out.dim(1) == input_shape[1] && grad_out.dim(2) == t_out &&
              argmax.size() == grad_out.size(),
          "maxpool_backward: shape mismatch");
  Tensor gx(input_shape);
  const std::size_t rows = input_shape[0] * input_shape[1];
  for (std::size_t row = 0; row < rows; ++row) {
    const double* gr = grad_out.data() + row * t_out;
    const std::uint8_t* ar = argmax.data() + row * t_out;
    double* gxr = gx.data() + row * t_in;
    for (std::size_t t = 0; t < t_out; ++t) gxr[2 * t + ar[t]] = gr[t];
  }
  check_finite(gx, "maxpool_backward");
  return gx;
}

namespace {

typedef std::int64_t Int4 __attribute__((vector_size(32)));

constexpr std::array<double, 17> inverse_factorials() {
  std::array<double, 17> f{};
  f[0] = 1.0;
  for (std::size_t k = 1; k < f.size(); ++k) f[k] = f[k - 1] / static_cast<double>(k);
  return f;
}
constexpr std::array<double, 17> kInvFact = inverse_factorials();

// expm1 on four lanes, for x <= 0.  Near zero a Taylor series keeps full
// relative accuracy; elsewhere exp(x) - 1 with exp from range reduction
// x = n ln2 + r, |r| <= ln2 / 2.  Every lane runs the same arithmetic, so a
// value does not depend on its position in the tensor.
inline Vec4 expm1_nonpositive(Vec4 x) {
  x = x < splat4(-60.0) ? splat4(-60.0) : x;
  // |x| < 0.5: x + x^2/2! + ... + x^16/16!.
  Vec4 small = splat4(kInvFact[16]);
  for (int k = 15; k >= 1; --k) small = small * x + splat4(kInvFact[k]);
  small = small * x;

  constexpr double kInvLn2 = 1.4426950408889634;
  constexpr double kLn2Hi = 6.93147180369123816490e-01;
  constexpr double kLn2Lo = 1.90821492927058770002e-10;
  constexpr double kShifter = 6755399441055744.0;  // 1.5 * 2^52
  const Vec4 nd = (x * splat4(kInvLn2) + splat4(kShifter)) - splat4(kShifter);
  const Vec4 r = (x - nd * splat4(kLn2Hi)) - nd * splat4(kLn2Lo);
  Vec4 p = splat4(kInvFact[13]);
  for (int k = 12; k >= 0; --k) p = p * r + splat4(kInvFact[k]);
  const Int4 n = __builtin_convertvector(nd, Int4);
  const Int4 bits = (n + 1023) << 52;
  Vec4 scale;
  std::memcpy(&scale, &bits, sizeof scale);
  const Vec4 large = p * scale - splat4(1.0);

  return x > splat4(-0.5) ? small : large;
}

inline Vec4 selu4(Vec4 v) {
  const Vec4 neg = splat4(kSeluLambda * kSeluAlpha) *
                   expm1_nonpositive(v > splat4(0.0) ? splat4(0.0) : v);
  return v > splat4(0.0) ? splat4(kSeluLambda) * v : neg;
}

}  // namespace

double selu(double x) { return selu4(splat4(x))[0]; }

void selu_inplace(Tensor& x) {
  double* d = x.data();
  const std::size_t n = x.size();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) store4(d + i, selu4(load4(d + i)));
  if (i < n) {
    double pad[kLanes] = {0.0, 0.0, 0.0, 0.0};
    std::copy(d + i, d + n, pad);
    store4(pad, selu4(load4(pad)));
    std::copy(pad, pad + (n - i), d + i);
  }
  check_finite(x, "selu");
}

Tensor selu(const Tensor& x) {
  Tensor y = x;
  selu_inplace(y);
  return y;
}

Tensor selu_backward(const Tensor& x, const Tensor& grad_out) {
  require(x.shape() == grad_out.shape(), "selu_backward: shape mismatch");
  Tensor g(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x[i];
    const double d = v > 0.0 ? kSeluLambda : kSeluLambda * kSeluAlpha * std::exp(v);
    g[i] = d * grad_out[i];
  }
  check_finite(g, "selu_backward");
  return g;
}

Tensor selu_backward_from_output(const Tensor& y, const Tensor& grad_out) {
  require(y.shape() == grad_out.shape(), "selu_backward: shape mismatch");
  Tensor g(y.shape());
  const Vec4 lambda = splat4(kSeluLambda);
  const Vec4 neg_scale = splat4(kSeluLambda * kSeluAlpha);
  const std::size_t n = y.size();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const Vec4 v = load4(y.data() + i);
    const Vec4 d = v > splat4(0.0) ? lambda : v + neg_scale;
    store4(g.data() + i, d * load4(grad_out.data() + i));
  }
  for (; i < n; ++i) {
    const double v = y[i];
    g[i] = (v > 0.0 ? kSeluLambda : v + kSeluLambda * kSeluAlpha) * grad_out[i];
  }
  check_finite(g, "selu_backward");
  return g;
}

Tensor dense_forward(const Tensor& x, const Tensor& w, const Tensor& bias) {
  require(x.rank() == 2 && w.rank() == 2,
          "dense_forward: expected x [B,F] and W [O,F]");
  const std::size_t batch = x.dim(0), feat = x.dim(1), out = w.dim(0);
  require(w.dim(1) == feat, "dense_forward: feature mismatch, x " +
                                shape_string(x.shape()) + " W " +
                                shape_string(w.shape()));
  require(bias.rank() == 1 && bias.dim(0) == out,
          "dense_forward: bias must be [O]");
  Tensor y({batch, out});
  for (std::size_t b = 0; b < batch; ++b) {
    const double* xb = x.data() + b * feat;
    for (std::size_t o = 0; o < out; ++o) {
      y.at(b, o) = bias[o] + dot(xb, w.data() + o * feat, feat);
    }
  }
  check_finite(y, "dense_forward");
  return y;
}

DenseGrads dense_backward(const Tensor& grad_out, const Tensor& x,
                          const Tensor& w) {
  require(x.rank() == 2 && w.rank() == 2 && grad_out.rank() == 2,
          "dense_backward: expected rank-2 tensors");
  const std::size_t batch = x.dim(0), feat = x.dim(1), out = w.dim(0);
  require(w.dim(1) == feat && grad_out.dim(0) == batch &&
              grad_out.dim(1) == out,
          "dense_backward: shape mismatch");
  DenseGrads g;
  g.grad_x = Tensor({batch, feat});
  g.grad_w = Tensor({out, feat});
  g.grad_b = Tensor({out});
  for (std::size_t b = 0; b < batch; ++b) {
    const double* xb = x.data() + b * feat;
    double* gxb = g.grad_x.data() + b * feat;
    for (std::size_t o = 0; o < out; ++o) {
      const double go = grad_out.at(b, o);
      g.grad_b[o] += go;
      const double* wo = w.data() + o * feat;
      double* gwo = g.grad_w.data() + o * feat;
      for (std::size_t f = 0; f < feat; ++f) {
        gxb[f] += go * wo[f];
        gwo[f] += go * xb[f];
      }
    }
  }
  check_finite(g.grad_x, "dense_backward");
  check_finite(g.grad_w, "dense_backward");
  return g;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor sigmoid(const Tensor& x) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = sigmoid(x[i]);
  check_finite(y, "sigmoid");
  return y;
}

Tensor sigmoid_backward(const Tensor& y, const Tensor& grad_out) {
  require(y.shape() == grad_out.shape(), "sigmoid_backward: shape mismatch");
  Tensor g(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i) {
    g[i] = grad_out[i] * y[i] * (1.0 - y[i]);
  }
  check_finite(g, "sigmoid_backward");
  return g;
}

Tensor hardtanh_bounded(const Tensor& x, double lo, double hi) {
  require(lo < hi, "hardtanh_bounded: lo must be < hi");
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::min(hi, std::max(lo, x[i]));
  check_finite(y, "hardtanh_bounded");
  return y;
}

Tensor hardtanh_bounded_backward(const Tensor& x, const Tensor& grad_out,
                                 double lo, double hi) {
  require(x.shape() == grad_out.shape(),
          "hardtanh_bounded_backward: shape mismatch");
  Tensor g(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    g[i] = (x[i] > lo && x[i] < hi) ? grad_out[i] : 0.0;
  }
  return g;
}

}  // namespace gci::nn
