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

// Adamax: Adam with the second moment replaced by an exponentially
// weighted infinity norm.
//
//   m <- beta1 * m + (1 - beta1) * g
//   u <- max(beta2 * u, |g|)
//   theta <- theta - (lr / (1 - beta1^t)) * m / (u + eps)

#ifndef GCI_NN_ADAMAX_HPP_
#define GCI_NN_ADAMAX_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "gci/nn/tensor.hpp"

namespace gci::nn {

struct AdamaxHyper {
  double lr = 2e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  bool operator==(const AdamaxHyper&) const = default;
};

// Moment buffers for one parameter tensor.
struct AdamaxMoments {
  std::vector<double> m;
  std::vector<double> u;

  bool operator==(const AdamaxMoments&) const = default;
};

struct AdamaxState {
  AdamaxHyper hyper;
  std::uint64_t step = 0;
  std::vector<AdamaxMoments> moments;  // one entry per parameter tensor

  bool operator==(const AdamaxState&) const = default;
};

// Initializes zeroed moments matching `params`.
AdamaxState make_adamax_state(std::span<Tensor* const> params,
                              AdamaxHyper hyper = {});

// Applies one update to every parameter tensor.  Throws NumericalError if
// any gradient is non-finite (before touching parameters) and ConfigError on
// shape mismatch.
void adamax_step(std::span<Tensor* const> params,
                 std::span<const Tensor* const> grads, AdamaxState& state);

}  // namespace gci::nn

#endif  // GCI_NN_ADAMAX_HPP_
