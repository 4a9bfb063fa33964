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

#include "gci/wav.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gci/binary_io.hpp"
#include "gci/error.hpp"
#include "gci/log.hpp"

namespace gci {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

struct FmtChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
};

[[noreturn]] void malformed(const std::filesystem::path& path, const std::string& why) {
  throw WavError(WavError::Kind::kMalformed, path.string() + ": " + why);
}

}  // namespace

Waveform read_wav(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw WavError(WavError::Kind::kMissingFile, "no such WAV file: " + path.string());
  }
  const std::vector<std::uint8_t> bytes = bin::read_file(path);
  bin::Reader r(bytes);
  FmtChunk fmt;
  bool have_fmt = false;
  try {
    if (r.bytes(4) != "RIFF") malformed(path, "missing RIFF header");
    r.u32();
    if (r.bytes(4) != "WAVE") malformed(path, "not a WAVE file");
    while (r.remaining() >= 8) {
      const std::string id = r.bytes(4);
      const std::uint32_t size = r.u32();
      if (id == "fmt ") {
        if (size < 16) malformed(path, "fmt chunk too small");
        if (size > r.remaining()) malformed(path, "truncated fmt chunk");
        bin::Reader f(std::span<const std::uint8_t>(bytes).subspan(r.position(), size));
        fmt.format = f.u16();
        fmt.channels = f.u16();
        fmt.sample_rate = f.u32();
        f.u32();  // byte rate
        f.u16();  // block align
        fmt.bits = f.u16();
        if (fmt.format == kFormatExtensible) {
          if (size < 40) malformed(path, "extensible fmt chunk too small");
          f.u16();  // cbSize
          f.u16();  // valid bits
          f.u32();  // channel mask
          fmt.format = f.u16();  // first two bytes of the subformat GUID
        }
        have_fmt = true;
        r.skip(size + (size & 1));
      } else if (id == "data") {
        if (!have_fmt) malformed(path, "data chunk before fmt chunk");
        if (fmt.channels != 1) {
          throw WavError(WavError::Kind::kNotMono,
                         path.string() + ": expected mono, found " +
                             std::to_string(fmt.channels) + " channels");
        }
        const bool pcm16 = fmt.format == kFormatPcm && fmt.bits == 16;
        const bool float32 = fmt.format == kFormatFloat && fmt.bits == 32;
        if (!pcm16 && !float32) {
          throw WavError(WavError::Kind::kUnsupportedEncoding,
                         path.string() + ": unsupported encoding (format " +
                             std::to_string(fmt.format) + ", " +
                             std::to_string(fmt.bits) +
                             " bits); need 16-bit PCM or 32-bit float");
        }
        if (fmt.sample_rate == 0) malformed(path, "zero sample rate");
        // Tolerate writers that leave a bogus size on a streamed data chunk.
        const std::size_t avail = std::min<std::size_t>(size, r.remaining());
        const std::size_t frame = pcm16 ? 2 : 4;
        Waveform w;
        w.sample_rate = static_cast<int>(fmt.sample_rate);
        w.samples.resize(avail / frame);
        for (double& s : w.samples) {
          s = pcm16 ? static_cast<double>(r.i16()) / 32768.0
                    : static_cast<double>(r.f32());
        }
        return w;
      } else {
        r.skip(std::min<std::size_t>(size + (size & 1), r.remaining()));
      }
    }
  } catch (const FormatError& e) {
    malformed(path, e.what());
  }
  malformed(path, "no data chunk");
}

void write_wav(const Waveform& w, const std::filesystem::path& path,
               WavEncoding encoding) {
  if (w.sample_rate <= 0) throw DataError("write_wav: sample rate must be positive");
  std::size_t clipped = 0;
  auto clip = [&](double x) {
    if (x > 1.0 || x < -1.0 || std::isnan(x)) {
      ++clipped;
      return std::isnan(x) ? 0.0 : std::clamp(x, -1.0, 1.0);
    }
    return x;
  };

  const bool pcm16 = encoding == WavEncoding::kPcm16;
  const std::uint16_t bits = pcm16 ? 16 : 32;
  const std::uint32_t block = bits / 8;
  const std::uint32_t data_size = static_cast<std::uint32_t>(w.size() * block);

  bin::Writer out;
  out.bytes("RIFF");
  out.u32(36 + data_size);
  out.bytes("WAVE");
  out.bytes("fmt ");
  out.u32(16);
  out.u16(pcm16 ? kFormatPcm : kFormatFloat);
  out.u16(1);
  out.u32(static_cast<std::uint32_t>(w.sample_rate));
  out.u32(static_cast<std::uint32_t>(w.sample_rate) * block);
  out.u16(static_cast<std::uint16_t>(block));
  out.u16(bits);
  out.bytes("data");
  out.u32(data_size);
  for (double x : w.samples) {
    const double v = clip(x);
    if (pcm16) {
      const double code = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
      out.i16(static_cast<std::int16_t>(code));
    } else {
      out.f32(static_cast<float>(v));
    }
  }
  if (clipped > 0) {
    log::warn("write_wav: clipped " + std::to_string(clipped) +
              " samples outside [-1, 1] in " + path.string());
  }
  bin::write_file(path, out.buffer());
}

}  // namespace gci
