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

// Minibatch training of the joint objective with Adamax.

#ifndef GCI_TRAIN_HPP_
#define GCI_TRAIN_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "gci/framing.hpp"
#include "gci/loss.hpp"
#include "gci/model.hpp"
#include "gci/nn/adamax.hpp"

namespace gci {

struct TrainConfig {
  std::size_t batch_size = 256;
  std::size_t epochs = 10;
  LossWeights loss;
  nn::AdamaxHyper adamax;
  std::uint64_t seed = 0;

  // Throws ConfigError for a zero batch size or non-positive loss weights.
  void validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;      // means over records
  double classification = 0.0;
  double regression = 0.0;
  std::size_t batches = 0;
};

using EpochCallback = std::function<void(const EpochStats&)>;

// Trains in place.  Records are reshuffled every epoch from a stream seeded
// by tc.seed; the optimizer state on the model is continued, so a loaded
// checkpoint resumes where it stopped.  A non-finite loss or gradient
// raises NumericalError naming the epoch and batch.
std::vector<EpochStats> train(Model& model, const FrameDataset& data, const TrainConfig& tc,
                              const EpochCallback& on_epoch = {});

// Copies records [indices] into a [B, wi] batch.
nn::Tensor gather_frames(const FrameDataset& data, std::span<const std::size_t> indices);

}  // namespace gci

#endif  // GCI_TRAIN_HPP_
