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

// Checkpoint container, little-endian throughout:
//
//   "GCICKPT1"                 8-byte magic
//   u32 version                currently 1
//   str config                 key = value lines (ModelConfig)
//   u32 tensor count
//   per tensor: str name, u32 rank, u64 dims[rank], f64 values[]
//   f64 lr, beta1, beta2, eps; u64 step
//   per tensor: f64 m[], f64 u[]   (same order and sizes as the tensors)
//   u32 CRC32 of every preceding byte
//
// "str" is a u32 byte count followed by the bytes.

#ifndef GCI_CHECKPOINT_HPP_
#define GCI_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gci/model.hpp"

namespace gci {

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string model_config_text(const ModelConfig& cfg);
// Throws FormatError on unknown keys or malformed values.
ModelConfig parse_model_config_text(const std::string& text);

std::vector<std::uint8_t> serialize_checkpoint(const Model& model);
// FormatError on bad magic, version mismatch, truncation, checksum failure
// or tensors that do not match the stored config.
Model deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const Model& model, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace gci

#endif  // GCI_CHECKPOINT_HPP_
