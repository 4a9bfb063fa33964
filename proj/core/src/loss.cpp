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

#include "gci/loss.hpp"

#include <cmath>
#include <string>

#include "gci/error.hpp"

namespace gci {

JointLoss joint_loss(std::span<const double> y_c, std::span<const double> y_r,
                     std::span<const std::uint8_t> t_c, std::span<const double> t_r,
                     const LossWeights& weights) {
  const std::size_t n = y_c.size();
  if (n == 0) throw ConfigError("joint_loss: empty batch");
  if (y_r.size() != n || t_c.size() != n || t_r.size() != n) {
    throw ConfigError("joint_loss: prediction/target lengths differ");
  }
  if (!(weights.w_c > 0.0) || !(weights.w_r > 0.0)) {
    throw ConfigError("joint_loss: loss weights must be positive");
  }
  const double lo = weights.eps_p, hi = 1.0 - weights.eps_p;

  JointLoss out;
  out.grad_y_c.assign(n, 0.0);
  out.grad_y_r.assign(n, 0.0);
  std::size_t positives = 0;
  for (std::uint8_t t : t_c) positives += t ? 1 : 0;
  out.terms.positives = positives;

  const double cls_scale = weights.w_c / static_cast<double>(n);
  double ce = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double y = y_c[j];
    const double p = std::min(hi, std::max(lo, y));
    const bool inside = y > lo && y < hi;
    if (t_c[j]) {
      ce += std::log(p);
      if (inside) out.grad_y_c[j] = -cls_scale / p;
    } else {
      ce += std::log(1.0 - p);
      if (inside) out.grad_y_c[j] = cls_scale / (1.0 - p);
    }
  }
  out.terms.classification = -cls_scale * ce;

  if (positives > 0) {
    const double reg_scale = weights.w_r / static_cast<double>(positives);
    double se = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!t_c[j]) continue;
      const double diff = t_r[j] - y_r[j];
      se += diff * diff;
      out.grad_y_r[j] = -2.0 * reg_scale * diff;
    }
    out.terms.regression = reg_scale * se;
  }
  out.terms.loss = out.terms.classification + out.terms.regression;
  if (!std::isfinite(out.terms.loss)) {
    throw NumericalError("joint_loss: non-finite loss " + std::to_string(out.terms.loss));
  }
  return out;
}

}  // namespace gci
