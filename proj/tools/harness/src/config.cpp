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

#include "gci/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "gci/error.hpp"

namespace gci::harness {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double to_double(const std::string& where, const std::string& v) {
  if (v == "inf") return HUGE_VAL;
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw ConfigError(where + ": expected a number, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& where, const std::string& v) {
  std::uint64_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw ConfigError(where + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& where, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(where + ": expected true or false, got '" + v + "'");
}

// Reads keys out of one section and remembers which were consumed.
class Section {
 public:
  Section(std::string name, const pt::ptree* node) : name_(std::move(name)), node_(node) {}

  std::optional<std::string> raw(const std::string& key) {
    used_.insert(key);
    if (!node_) return std::nullopt;
    const auto it = node_->find(key);
    if (it == node_->not_found()) return std::nullopt;
    // property_tree keeps inline comments as part of the value.
    std::string v = it->second.data();
    for (std::size_t i = 1; i < v.size(); ++i) {
      if ((v[i] == ';' || v[i] == '#') && std::isspace(static_cast<unsigned char>(v[i - 1]))) {
        v.resize(i);
        break;
      }
    }
    return trim(v);
  }
  std::string where(const std::string& key) const { return "[" + name_ + "] " + key; }

  std::string str(const std::string& key, const std::string& dflt) {
    return raw(key).value_or(dflt);
  }
  double num(const std::string& key, double dflt) {
    const auto v = raw(key);
    return v ? to_double(where(key), *v) : dflt;
  }
  std::uint64_t u64(const std::string& key, std::uint64_t dflt) {
    const auto v = raw(key);
    return v ? to_u64(where(key), *v) : dflt;
  }
  bool flag(const std::string& key, bool dflt) {
    const auto v = raw(key);
    return v ? to_bool(where(key), *v) : dflt;
  }

  void reject_unknown() const {
    if (!node_) return;
    for (const auto& [key, child] : *node_) {
      if (!used_.count(key)) throw ConfigError("unknown config key " + where(key));
      if (!child.empty()) throw ConfigError("nested value under " + where(key));
    }
  }

 private:
  std::string name_;
  const pt::ptree* node_;
  std::set<std::string> used_;
};

std::vector<SnrLevel> parse_snr_list(const std::string& where, const std::string& v) {
  std::vector<SnrLevel> out;
  for (const std::string& item : split_list(v)) {
    try {
      out.push_back(parse_snr(item));
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  if (out.empty()) throw ConfigError(where + ": empty SNR list");
  return out;
}

std::string snr_list_text(const std::vector<SnrLevel>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + snr_label(v[i]);
  return s;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
  return s;
}

std::filesystem::path anchor(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

void read_split(Section& s, SplitSpec& split) {
  try {
    split.mode = parse_split_mode(s.str("mode", to_string(split.mode)));
  } catch (const ConfigError& e) {
    throw ConfigError(s.where("mode") + ": " + e.what());
  }
  split.train_fraction = s.num("fraction", split.train_fraction);
  split.seed = s.u64("seed", split.seed);
  if (auto v = s.raw("train_groups")) split.train_groups = split_list(*v);
  if (auto v = s.raw("test_groups")) split.test_groups = split_list(*v);
  if (!(split.train_fraction > 0.0 && split.train_fraction < 1.0)) {
    throw ConfigError(s.where("fraction") + ": must lie in (0, 1)");
  }
}

}  // namespace

SnrLevel parse_snr(const std::string& s) {
  const std::string v = trim(s);
  if (v == "clean" || v == "none") return std::nullopt;
  const double db = to_double("snr", v);
  if (!(db >= -10.0 && db <= 60.0)) {
    throw ConfigError("SNR " + v + " dB outside the supported range [-10, 60] dB");
  }
  return db;
}

std::string snr_label(const SnrLevel& snr) { return snr ? fmt_double(*snr) : "clean"; }

std::string snr_tag(const SnrLevel& snr) { return snr ? "snr" + fmt_double(*snr) : "clean"; }

ModelConfig RunConfig::resolved_model(int sample_rate) const {
  ModelConfig m = model;
  m.wd_samples = static_cast<std::size_t>(framing.wd_samples(sample_rate));
  m.wi_samples = static_cast<std::size_t>(framing.wi_samples(sample_rate));
  m.sample_rate = sample_rate;
  return m;
}

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir,
                           const std::vector<std::string>& overrides) {
  pt::ptree tree;
  {
    std::istringstream is(text);
    try {
      pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    // read_ini drops sections without keys; a bare [condition.x] is valid.
    std::vector<std::string> headers;
    std::istringstream lines(text);
    for (std::string line; std::getline(lines, line);) {
      line = trim(line);
      if (line.size() > 2 && line.front() == '[' && line.back() == ']') {
        headers.push_back(trim(line.substr(1, line.size() - 2)));
      }
    }
    pt::ptree ordered;
    for (const auto& kv : tree) {
      if (std::find(headers.begin(), headers.end(), kv.first) == headers.end()) {
        ordered.push_back(kv);
      }
    }
    for (const std::string& h : headers) {
      const auto it = tree.find(h);
      ordered.push_back({h, it == tree.not_found() ? pt::ptree() : it->second});
    }
    tree.swap(ordered);
  }
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    const auto dot = o.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
      throw ConfigError("override '" + o + "' is not of the form section.key=value");
    }
    // Condition sections carry a dot of their own: condition.NAME.key.
    const std::string lhs = trim(o.substr(0, eq));
    const auto last = lhs.rfind('.');
    const std::string section = lhs.substr(0, last), key = lhs.substr(last + 1);
    pt::ptree* node = nullptr;
    if (auto it = tree.find(section); it != tree.not_found()) {
      node = &it->second;
    } else {
      node = &tree.push_back({section, pt::ptree()})->second;
    }
    node->put(pt::ptree::path_type(key, '\0'), trim(o.substr(eq + 1)));
  }

  const std::set<std::string> known = {"run", "corpus", "labels", "noise", "framing",
                                       "model", "train", "split", "cluster"};
  std::map<std::string, const pt::ptree*> nodes;
  std::vector<std::pair<std::string, const pt::ptree*>> condition_nodes;
  for (const auto& [name, child] : tree) {
    if (name.rfind("condition.", 0) == 0) {
      condition_nodes.emplace_back(name.substr(10), &child);
    } else if (known.count(name)) {
      nodes[name] = &child;
    } else {
      throw ConfigError(child.empty() ? "config key '" + name + "' outside any section"
                                      : "unknown config section [" + name + "]");
    }
  }
  auto section = [&](const std::string& n) {
    const auto it = nodes.find(n);
    return Section(n, it == nodes.end() ? nullptr : it->second);
  };

  RunConfig cfg;
  {
    Section s = section("run");
    std::filesystem::path out = s.str("output", cfg.output_dir.string());
    if (out.is_relative()) {
      if (const char* root = std::getenv("GCINET_OUTPUT_ROOT"); root && *root) {
        out = std::filesystem::path(root) / out;
      }
    }
    cfg.output_dir = std::filesystem::absolute(out).lexically_normal();
    s.reject_unknown();
  }
  {
    Section s = section("corpus");
    cfg.manifest = anchor(base_dir, s.str("manifest", ""));
    s.reject_unknown();
  }
  {
    Section s = section("labels");
    cfg.degg.min_period_ms = s.num("min_period_ms", cfg.degg.min_period_ms);
    cfg.degg.prominence_frac = s.num("prominence_frac", cfg.degg.prominence_frac);
    cfg.degg.invert_polarity = s.flag("invert_polarity", cfg.degg.invert_polarity);
    s.reject_unknown();
  }
  {
    Section s = section("noise");
    cfg.noise_file = anchor(base_dir, s.str("file", ""));
    cfg.noise_seed = s.u64("seed", cfg.noise_seed);
    if (auto v = s.raw("snr_db")) cfg.snrs = parse_snr_list(s.where("snr_db"), *v);
    s.reject_unknown();
  }
  {
    Section s = section("framing");
    cfg.framing.wd_ms = s.num("wd_ms", cfg.framing.wd_ms);
    cfg.framing.context_ms = s.num("context_ms", cfg.framing.context_ms);
    cfg.framing.shift_samples = static_cast<std::int64_t>(
        s.u64("shift_samples", static_cast<std::uint64_t>(cfg.framing.shift_samples)));
    s.reject_unknown();
  }
  {
    Section s = section("model");
    ModelConfig& m = cfg.model;
    m.num_conv_layers = s.u64("num_conv_layers", m.num_conv_layers);
    m.kernel_size = s.u64("kernel_size", m.kernel_size);
    m.channels = s.u64("channels", m.channels);
    if (auto v = s.raw("dilations"); v && *v != "auto") {
      m.dilations.clear();
      for (const std::string& d : split_list(*v)) m.dilations.push_back(to_u64(s.where("dilations"), d));
    }
    m.head_hidden = s.u64("head_hidden", m.head_hidden);
    try {
      m.input_scale = parse_input_scale(s.str("input_scale", to_string(m.input_scale)));
    } catch (const ConfigError& e) {
      throw ConfigError(s.where("input_scale") + ": " + e.what());
    }
    m.pooling = s.flag("pooling", m.pooling);
    cfg.model_seed = s.u64("seed", cfg.model_seed);
    s.reject_unknown();
  }
  {
    Section s = section("train");
    TrainConfig& t = cfg.train;
    t.batch_size = s.u64("batch_size", t.batch_size);
    t.epochs = s.u64("epochs", t.epochs);
    t.adamax.lr = s.num("lr", t.adamax.lr);
    t.adamax.beta1 = s.num("beta1", t.adamax.beta1);
    t.adamax.beta2 = s.num("beta2", t.adamax.beta2);
    t.adamax.eps = s.num("eps", t.adamax.eps);
    t.loss.w_c = s.num("w_c", t.loss.w_c);
    t.loss.w_r = s.num("w_r", t.loss.w_r);
    t.loss.eps_p = s.num("eps_p", t.loss.eps_p);
    t.seed = s.u64("seed", t.seed);
    cfg.neg_to_pos_ratio = s.num("neg_to_pos_ratio", cfg.neg_to_pos_ratio);
    if (auto v = s.raw("snr")) cfg.train_snr = parse_snr(*v);
    s.reject_unknown();
    t.validate();
    if (!(cfg.neg_to_pos_ratio >= 0.0)) throw ConfigError("[train] neg_to_pos_ratio must be >= 0");
  }
  {
    Section s = section("split");
    read_split(s, cfg.split);
    s.reject_unknown();
  }
  {
    Section s = section("cluster");
    ClusterConfig& c = cfg.cluster;
    c.bin_size = s.u64("bin_size", c.bin_size);
    c.threshold = s.num("threshold", c.threshold);
    c.inference_shift = static_cast<std::int64_t>(
        s.u64("inference_shift", static_cast<std::uint64_t>(c.inference_shift)));
    c.prune_low_mass = s.flag("prune_low_mass", c.prune_low_mass);
    c.min_group_mass = s.num("min_group_mass", c.min_group_mass);
    s.reject_unknown();
    c.validate();
  }
  std::set<std::string> names;
  for (const auto& [name, node] : condition_nodes) {
    if (name.empty() || name.find_first_of("/\\ ") != std::string::npos) {
      throw ConfigError("condition name '" + name + "' must be a non-empty word");
    }
    if (!names.insert(name).second) throw ConfigError("duplicate condition '" + name + "'");
    Section s("condition." + name, node);
    Condition c;
    c.name = name;
    c.split = cfg.split;
    if (auto v = s.raw("train_snr")) c.train_snr = parse_snr(*v);
    if (auto v = s.raw("test_snr")) c.test_snrs = parse_snr_list(s.where("test_snr"), *v);
    read_split(s, c.split);
    s.reject_unknown();
    cfg.conditions.push_back(std::move(c));
  }
  cfg.framing.validate(kDefaultSampleRate);
  for (const auto& [what, path] : {std::pair{"[corpus] manifest", cfg.manifest},
                                   std::pair{"[noise] file", cfg.noise_file}}) {
    if (!path.empty() && !std::filesystem::is_regular_file(path)) {
      throw ConfigError(std::string(what) + ": no such file " + path.string());
    }
  }
  return cfg;
}

RunConfig load_run_config(const std::optional<std::filesystem::path>& file,
                          const std::vector<std::string>& overrides) {
  if (!file) return parse_run_config("", std::filesystem::current_path(), overrides);
  std::ifstream is(*file, std::ios::binary);
  if (!is) throw IoError("cannot read config file " + file->string());
  std::stringstream ss;
  ss << is.rdbuf();
  const std::filesystem::path base = std::filesystem::absolute(*file).parent_path();
  return parse_run_config(ss.str(), base, overrides);
}

std::string run_config_text(const RunConfig& cfg) {
  std::ostringstream os;
  auto b = [](bool v) { return v ? "true" : "false"; };
  os << "[run]\noutput = " << cfg.output_dir.string() << "\n\n";
  os << "[corpus]\nmanifest = " << cfg.manifest.string() << "\n\n";
  os << "[labels]\nmin_period_ms = " << fmt_double(cfg.degg.min_period_ms)
     << "\nprominence_frac = " << fmt_double(cfg.degg.prominence_frac)
     << "\ninvert_polarity = " << b(cfg.degg.invert_polarity) << "\n\n";
  os << "[noise]\nfile = " << cfg.noise_file.string() << "\nseed = " << cfg.noise_seed
     << "\nsnr_db = " << snr_list_text(cfg.snrs) << "\n\n";
  os << "[framing]\nwd_ms = " << fmt_double(cfg.framing.wd_ms)
     << "\ncontext_ms = " << fmt_double(cfg.framing.context_ms)
     << "\nshift_samples = " << cfg.framing.shift_samples << "\n\n";
  const ModelConfig& m = cfg.model;
  os << "[model]\nnum_conv_layers = " << m.num_conv_layers << "\nkernel_size = " << m.kernel_size
     << "\nchannels = " << m.channels << "\ndilations = ";
  if (m.dilations.empty()) {
    os << "auto";
  } else {
    for (std::size_t i = 0; i < m.dilations.size(); ++i) os << (i ? ", " : "") << m.dilations[i];
  }
  os << "\nhead_hidden = " << m.head_hidden << "\ninput_scale = " << to_string(m.input_scale)
     << "\npooling = " << b(m.pooling) << "\nseed = " << cfg.model_seed << "\n\n";
  const TrainConfig& t = cfg.train;
  os << "[train]\nbatch_size = " << t.batch_size << "\nepochs = " << t.epochs
     << "\nlr = " << fmt_double(t.adamax.lr) << "\nbeta1 = " << fmt_double(t.adamax.beta1)
     << "\nbeta2 = " << fmt_double(t.adamax.beta2) << "\neps = " << fmt_double(t.adamax.eps)
     << "\nw_c = " << fmt_double(t.loss.w_c) << "\nw_r = " << fmt_double(t.loss.w_r)
     << "\neps_p = " << fmt_double(t.loss.eps_p) << "\nseed = " << t.seed
     << "\nneg_to_pos_ratio = " << fmt_double(cfg.neg_to_pos_ratio)
     << "\nsnr = " << snr_label(cfg.train_snr) << "\n\n";
  auto split_text = [&](const SplitSpec& s) {
    os << "mode = " << to_string(s.mode) << "\nfraction = " << fmt_double(s.train_fraction)
       << "\nseed = " << s.seed << "\ntrain_groups = " << join(s.train_groups)
       << "\ntest_groups = " << join(s.test_groups) << "\n";
  };
  os << "[split]\n";
  split_text(cfg.split);
  os << "\n";
  const ClusterConfig& c = cfg.cluster;
  os << "[cluster]\nbin_size = " << c.bin_size << "\nthreshold = " << fmt_double(c.threshold)
     << "\ninference_shift = " << c.inference_shift
     << "\nprune_low_mass = " << b(c.prune_low_mass)
     << "\nmin_group_mass = " << fmt_double(c.min_group_mass) << "\n";
  for (const Condition& cond : cfg.conditions) {
    os << "\n[condition." << cond.name << "]\ntrain_snr = " << snr_label(cond.train_snr)
       << "\ntest_snr = " << snr_list_text(cond.test_snrs) << "\n";
    split_text(cond.split);
  }
  return os.str();
}

}  // namespace gci::harness
