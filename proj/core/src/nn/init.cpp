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

#include "gci/nn/init.hpp"

#include <cmath>

#include "gci/error.hpp"

namespace gci::nn {

Tensor selu_init(const Shape& shape, std::size_t fan_in, std::mt19937_64& rng) {
  if (fan_in == 0) throw ConfigError("selu_init: fan_in must be positive");
  std::normal_distribution<double> normal(0.0,
                                          1.0 / std::sqrt(static_cast<double>(fan_in)));
  Tensor t(shape);
  for (double& v : t.values()) v = normal(rng);
  return t;
}

Tensor selu_init(const Shape& shape, std::size_t fan_in, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return selu_init(shape, fan_in, rng);
}

}  // namespace gci::nn
