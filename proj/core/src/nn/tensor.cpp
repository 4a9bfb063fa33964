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

#include "gci/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <sstream>

#include "gci/error.hpp"

namespace gci::nn {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return shape.empty() ? 0 : n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_size(shape_)) {
    throw ConfigError("tensor data length " + std::to_string(data_.size()) +
                      " does not match shape " + shape_string(shape_));
  }
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

void Tensor::reshape(Shape shape) {
  if (shape_size(shape) != data_.size()) {
    throw ConfigError("cannot reshape " + shape_string(shape_) + " to " +
                      shape_string(shape));
  }
  shape_ = std::move(shape);
}

void check_finite(std::span<const double> values, const char* op) {
  // NaN and Inf are exactly the values with an all-ones exponent; the
  // integer test vectorizes where a floating-point reduction would not.
  std::uint64_t bad = 0;
  for (double v : values) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    bad |= static_cast<std::uint64_t>(((bits >> 52) & 0x7ff) == 0x7ff);
  }
  if (bad) {
    const auto it = std::find_if(values.begin(), values.end(),
                                 [](double v) { return !std::isfinite(v); });
    std::ostringstream os;
    os << op << ": non-finite value " << *it << " at element "
       << (it - values.begin());
    throw NumericalError(os.str());
  }
}

void expect_shape(const Tensor& t, const Shape& expected, const char* what) {
  bool ok = t.rank() == expected.size();
  for (std::size_t i = 0; ok && i < expected.size(); ++i) {
    if (expected[i] != 0 && expected[i] != t.dim(i)) ok = false;
  }
  if (!ok) {
    throw ConfigError(std::string(what) + ": shape " +
                      shape_string(t.shape()) + " does not match expected " +
                      shape_string(expected) + " (0 = any)");
  }
}

}  // namespace gci::nn
