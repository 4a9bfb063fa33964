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

#include "gci/checkpoint.hpp"

#include <charconv>
#include <cstring>
#include <sstream>

#include "gci/binary_io.hpp"
#include "gci/error.hpp"

namespace gci {

namespace {

constexpr char kMagic[8] = {'G', 'C', 'I', 'C', 'K', 'P', 'T', '1'};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::size_t parse_size(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw FormatError("checkpoint config: bad value for " + key + ": '" + v + "'");
  }
  return out;
}

}  // namespace

std::string model_config_text(const ModelConfig& cfg) {
  std::ostringstream os;
  os << "num_conv_layers = " << cfg.num_conv_layers << "\n";
  os << "kernel_size = " << cfg.kernel_size << "\n";
  os << "channels = " << cfg.channels << "\n";
  os << "dilations = ";
  if (cfg.dilations.empty()) {
    os << "auto";
  } else {
    for (std::size_t i = 0; i < cfg.dilations.size(); ++i) os << (i ? "," : "") << cfg.dilations[i];
  }
  os << "\n";
  os << "head_hidden = " << cfg.head_hidden << "\n";
  os << "wd_samples = " << cfg.wd_samples << "\n";
  os << "wi_samples = " << cfg.wi_samples << "\n";
  os << "input_scale = " << to_string(cfg.input_scale) << "\n";
  os << "pooling = " << (cfg.pooling ? "true" : "false") << "\n";
  os << "sample_rate = " << cfg.sample_rate << "\n";
  return os.str();
}

ModelConfig parse_model_config_text(const std::string& text) {
  ModelConfig cfg;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("checkpoint config: malformed line '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "num_conv_layers") {
      cfg.num_conv_layers = parse_size(key, value);
    } else if (key == "kernel_size") {
      cfg.kernel_size = parse_size(key, value);
    } else if (key == "channels") {
      cfg.channels = parse_size(key, value);
    } else if (key == "dilations") {
      cfg.dilations.clear();
      if (value != "auto") {
        std::istringstream ds(value);
        std::string item;
        while (std::getline(ds, item, ',')) cfg.dilations.push_back(parse_size(key, trim(item)));
      }
    } else if (key == "head_hidden") {
      cfg.head_hidden = parse_size(key, value);
    } else if (key == "wd_samples") {
      cfg.wd_samples = parse_size(key, value);
    } else if (key == "wi_samples") {
      cfg.wi_samples = parse_size(key, value);
    } else if (key == "input_scale") {
      try {
        cfg.input_scale = parse_input_scale(value);
      } catch (const ConfigError& e) {
        throw FormatError(std::string("checkpoint config: ") + e.what());
      }
    } else if (key == "pooling") {
      if (value != "true" && value != "false") throw FormatError("checkpoint config: bad pooling");
      cfg.pooling = value == "true";
    } else if (key == "sample_rate") {
      cfg.sample_rate = static_cast<int>(parse_size(key, value));
    } else {
      throw FormatError("checkpoint config: unknown key '" + key + "'");
    }
  }
  return cfg;
}

std::vector<std::uint8_t> serialize_checkpoint(const Model& model) {
  bin::Writer w;
  w.bytes(std::string_view(kMagic, sizeof kMagic));
  w.u32(kCheckpointVersion);
  w.str(model_config_text(model.config));
  const auto params = model.parameters();
  const auto names = model.parameter_names();
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    w.str(names[i]);
    w.u32(static_cast<std::uint32_t>(params[i]->rank()));
    for (std::size_t d : params[i]->shape()) w.u64(d);
    w.f64s(params[i]->values());
  }
  const nn::AdamaxState& opt = model.optimizer;
  w.f64(opt.hyper.lr);
  w.f64(opt.hyper.beta1);
  w.f64(opt.hyper.beta2);
  w.f64(opt.hyper.eps);
  w.u64(opt.step);
  if (opt.moments.size() != params.size()) {
    throw ConfigError("checkpoint: optimizer state does not match the parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (opt.moments[i].m.size() != params[i]->size() || opt.moments[i].u.size() != params[i]->size()) {
      throw ConfigError("checkpoint: optimizer moments do not match " + names[i]);
    }
    w.f64s(opt.moments[i].m);
    w.f64s(opt.moments[i].u);
  }
  std::vector<std::uint8_t> out = w.buffer();
  bin::Writer tail;
  tail.u32(bin::crc32(out));
  out.insert(out.end(), tail.buffer().begin(), tail.buffer().end());
  return out;
}

Model deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < sizeof kMagic + 8 ||
      std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw FormatError("checkpoint: not a checkpoint file (bad magic)");
  }
  bin::Reader r(bytes);
  r.skip(sizeof kMagic);
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: version " + std::to_string(version) + " not supported (expected " +
                      std::to_string(kCheckpointVersion) + ")");
  }
  const std::span<const std::uint8_t> body(bytes.data(), bytes.size() - 4);
  bin::Reader crc_reader(std::span<const std::uint8_t>(bytes).subspan(bytes.size() - 4));
  if (bin::crc32(body) != crc_reader.u32()) {
    throw FormatError("checkpoint: checksum mismatch (file corrupt or truncated)");
  }

  const ModelConfig cfg = parse_model_config_text(r.str());
  Model model;
  try {
    model = build_model(cfg, 0);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint: stored config is invalid: ") + e.what());
  }
  auto params = model.parameters();
  const auto names = model.parameter_names();
  const std::uint32_t count = r.u32();
  if (count != params.size()) {
    throw FormatError("checkpoint: " + std::to_string(count) + " tensors, config implies " +
                      std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string name = r.str();
    if (name != names[i]) throw FormatError("checkpoint: expected tensor " + names[i] + ", found " + name);
    const std::uint32_t rank = r.u32();
    nn::Shape shape(rank);
    for (auto& d : shape) d = r.u64();
    if (shape != params[i]->shape()) {
      throw FormatError("checkpoint: tensor " + name + " has shape " + nn::shape_string(shape) +
                        ", config implies " + nn::shape_string(params[i]->shape()));
    }
    r.f64s(params[i]->values());
  }
  nn::AdamaxState& opt = model.optimizer;
  opt.hyper.lr = r.f64();
  opt.hyper.beta1 = r.f64();
  opt.hyper.beta2 = r.f64();
  opt.hyper.eps = r.f64();
  opt.step = r.u64();
  for (std::size_t i = 0; i < params.size(); ++i) {
    r.f64s(opt.moments[i].m);
    r.f64s(opt.moments[i].u);
  }
  if (r.remaining() != 4) throw FormatError("checkpoint: trailing bytes after optimizer state");
  return model;
}

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  bin::write_file(path, serialize_checkpoint(model));
}

Model load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(bin::read_file(path));
}

}  // namespace gci
