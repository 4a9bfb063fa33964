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

#include "gci/train.hpp"

#include <random>
#include <string>

#include "gci/error.hpp"
#include "gci/log.hpp"

namespace gci {

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("train: batch_size must be >= 1");
  if (!(loss.w_c > 0.0) || !(loss.w_r > 0.0)) {
    throw ConfigError("train: loss weights w_c and w_r must be positive");
  }
  if (!(loss.eps_p > 0.0 && loss.eps_p < 0.5)) throw ConfigError("train: eps_p must be in (0, 0.5)");
  if (!(adamax.lr >= 0.0)) throw ConfigError("train: learning rate must be >= 0");
}

nn::Tensor gather_frames(const FrameDataset& data, std::span<const std::size_t> indices) {
  const std::size_t len = data.frame_length();
  nn::Tensor batch({indices.size(), len});
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto f = data.frame(indices[i]);
    std::copy(f.begin(), f.end(), batch.data() + i * len);
  }
  return batch;
}

std::vector<EpochStats> train(Model& model, const FrameDataset& data, const TrainConfig& tc,
                              const EpochCallback& on_epoch) {
  tc.validate();
  if (data.empty()) throw DataError("train: empty training set");
  const int fs = data.sample_rate();
  check_compatible(model.config, static_cast<std::size_t>(data.config().wd_samples(fs)),
                   data.frame_length(), fs);

  model.optimizer.hyper = tc.adamax;
  auto params = model.parameters();
  if (model.optimizer.moments.size() != params.size()) {
    model.optimizer = nn::make_adamax_state(params, tc.adamax);
  }

  std::vector<std::size_t> order(data.size());
  std::vector<nn::Tensor> grads;
  std::vector<const nn::Tensor*> grad_ptrs;
  std::vector<std::uint8_t> tc_batch;
  std::vector<double> tr_batch;
  std::mt19937_64 rng(tc.seed);
  std::vector<EpochStats> history;

  for (std::size_t epoch = 1; epoch <= tc.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);
    }
    EpochStats st;
    st.epoch = epoch;
    for (std::size_t start = 0, b = 0; start < order.size(); start += tc.batch_size, ++b) {
      const std::size_t n = std::min(tc.batch_size, order.size() - start);
      const std::span<const std::size_t> idx(order.data() + start, n);
      const nn::Tensor batch = gather_frames(data, idx);
      tc_batch.resize(n);
      tr_batch.resize(n);
      for (std::size_t j = 0; j < n; ++j) {
        tc_batch[j] = data.t_c(idx[j]);
        tr_batch[j] = data.t_r(idx[j]);
      }
      try {
        const LossTerms terms = forward_backward(model, batch, tc_batch, tr_batch, tc.loss, grads);
        grad_ptrs.assign(grads.size(), nullptr);
        for (std::size_t k = 0; k < grads.size(); ++k) grad_ptrs[k] = &grads[k];
        nn::adamax_step(params, grad_ptrs, model.optimizer);
        st.loss += terms.loss * static_cast<double>(n);
        st.classification += terms.classification * static_cast<double>(n);
        st.regression += terms.regression * static_cast<double>(n);
      } catch (const NumericalError& e) {
        throw NumericalError("train: epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(b) + ": " + e.what());
      }
      ++st.batches;
    }
    const double total = static_cast<double>(order.size());
    st.loss /= total;
    st.classification /= total;
    st.regression /= total;
    log::debug("epoch " + std::to_string(epoch) + " loss " + std::to_string(st.loss));
    history.push_back(st);
    if (on_epoch) on_epoch(st);
  }
  return history;
}

}  // namespace gci
