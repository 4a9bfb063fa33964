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

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "gci/model.hpp"
#include "gci/nn/ops.hpp"

namespace {

gci::nn::Tensor random(const gci::nn::Shape& shape, std::uint64_t seed) {
  gci::nn::Tensor t(shape);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& v : t.values()) v = u(rng);
  return t;
}

// args: channels, dilation
void BM_ConvForward(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const auto x = random({64, c, 188}, 1), w = random({c, c, 5}, 2), b = random({c}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(gci::nn::conv1d_forward(x, w, b, d));
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_ConvForward)->Args({16, 1})->Args({32, 1})->Args({32, 4});

void BM_ConvBackward(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto x = random({64, c, 188}, 1), w = random({c, c, 5}, 2);
  const auto g = random({64, c, 184}, 4);
  for (auto _ : state) benchmark::DoNotOptimize(gci::nn::conv1d_backward(g, x, w, 1));
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_ConvBackward)->Arg(16)->Arg(32);

void BM_ForwardBackward(benchmark::State& state) {
  gci::ModelConfig cfg;
  cfg.channels = static_cast<std::size_t>(state.range(0));
  const gci::Model m = gci::build_model(cfg, 1);
  const std::size_t batch = 256;
  const auto frames = random({batch, cfg.wi_samples}, 5);
  std::vector<std::uint8_t> tc(batch, 0);
  std::vector<double> tr(batch, 0.0);
  for (std::size_t i = 0; i < batch; i += 40) tc[i] = 1, tr[i] = 16.0;
  std::vector<gci::nn::Tensor> grads;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gci::forward_backward(m, frames, tc, tr, {}, grads));
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_ForwardBackward)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace
