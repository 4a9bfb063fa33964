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

#ifndef GCI_NN_INIT_HPP_
#define GCI_NN_INIT_HPP_

#include <cstdint>
#include <random>

#include "gci/nn/tensor.hpp"

namespace gci::nn {

// Self-normalizing initialization: N(0, 1/fan_in) weights.
Tensor selu_init(const Shape& shape, std::size_t fan_in, std::uint64_t seed);
Tensor selu_init(const Shape& shape, std::size_t fan_in, std::mt19937_64& rng);

// Biases start at zero.
inline Tensor zero_bias(std::size_t n) { return Tensor({n}); }

}  // namespace gci::nn

#endif  // GCI_NN_INIT_HPP_
