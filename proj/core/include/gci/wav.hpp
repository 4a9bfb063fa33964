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

// Mono RIFF/WAVE reader and writer: 16-bit PCM or 32-bit IEEE float.

#ifndef GCI_WAV_HPP_
#define GCI_WAV_HPP_

#include <filesystem>

#include "gci/signal.hpp"

namespace gci {

enum class WavEncoding { kPcm16, kFloat32 };

// Samples come back in [-1, 1]; 16-bit codes are divided by 32768.
// Errors are WavError with a kind distinguishing missing files, non-mono
// data, unsupported encodings and malformed headers.
Waveform read_wav(const std::filesystem::path& path);

// Out-of-range samples are clipped to [-1, 1] with one warning per call.
// 16-bit codes are round(x * 32768) saturated to [-32768, 32767].
void write_wav(const Waveform& w, const std::filesystem::path& path,
               WavEncoding encoding = WavEncoding::kPcm16);

}  // namespace gci

#endif  // GCI_WAV_HPP_
