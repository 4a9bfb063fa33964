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

#include "gci/nn/adamax.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gci/error.hpp"

namespace gci::nn {

AdamaxState make_adamax_state(std::span<Tensor* const> params,
                              AdamaxHyper hyper) {
  AdamaxState state;
  state.hyper = hyper;
  state.moments.reserve(params.size());
  for (const Tensor* p : params) {
    state.moments.push_back({std::vector<double>(p->size(), 0.0),
                             std::vector<double>(p->size(), 0.0)});
  }
  return state;
}

void adamax_step(std::span<Tensor* const> params,
                 std::span<const Tensor* const> grads, AdamaxState& state) {
  if (params.size() != grads.size() || params.size() != state.moments.size()) {
    throw ConfigError("adamax_step: " + std::to_string(params.size()) +
                      " parameters, " + std::to_string(grads.size()) +
                      " gradients, " + std::to_string(state.moments.size()) +
                      " moment buffers");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->size() != grads[i]->size() ||
        state.moments[i].m.size() != params[i]->size()) {
      throw ConfigError("adamax_step: size mismatch for parameter " +
                        std::to_string(i));
    }
    check_finite(*grads[i], "adamax_step (gradient)");
  }

  const AdamaxHyper& h = state.hyper;
  ++state.step;
  const double step_size =
      h.lr / (1.0 - std::pow(h.beta1, static_cast<double>(state.step)));
  for (std::size_t i = 0; i < params.size(); ++i) {
    double* theta = params[i]->data();
    const double* g = grads[i]->data();
    double* m = state.moments[i].m.data();
    double* u = state.moments[i].u.data();
    const std::size_t n = params[i]->size();
    for (std::size_t j = 0; j < n; ++j) {
      m[j] = h.beta1 * m[j] + (1.0 - h.beta1) * g[j];
      u[j] = std::max(h.beta2 * u[j], std::abs(g[j]));
      theta[j] -= step_size * m[j] / (u[j] + h.eps);
    }
  }
}

}  // namespace gci::nn
