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

// Joint detection/localization objective over a batch of N windows:
//
//   L = -(w_c / N) * sum_j [t_c log y_c + (1 - t_c) log(1 - y_c)]
//       + (w_r / P) * sum_j t_c (t_r - y_r)^2,        P = sum_j t_c
//
// y_c is clipped to [eps_p, 1 - eps_p] before the logarithms (the clipped
// region has zero gradient).  With no positive window in the batch the
// regression term is 0.

#ifndef GCI_LOSS_HPP_
#define GCI_LOSS_HPP_

#include <cstdint>
#include <span>
#include <vector>

namespace gci {

struct LossWeights {
  double w_c = 1.0;
  double w_r = 10.0;
  double eps_p = 1e-7;

  bool operator==(const LossWeights&) const = default;
};

struct LossTerms {
  double loss = 0.0;
  double classification = 0.0;
  double regression = 0.0;
  std::size_t positives = 0;
};

struct JointLoss {
  LossTerms terms;
  std::vector<double> grad_y_c;
  std::vector<double> grad_y_r;
};

JointLoss joint_loss(std::span<const double> y_c, std::span<const double> y_r,
                     std::span<const std::uint8_t> t_c, std::span<const double> t_r,
                     const LossWeights& weights = {});

}  // namespace gci

#endif  // GCI_LOSS_HPP_
