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

#include "gci/harness/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "gci/error.hpp"

namespace gci::harness {

namespace fs = std::filesystem;

namespace {

constexpr const char* kHeader = "id,speech,egg,labels,speaker,dataset";

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::string relative_to(const fs::path& p, const fs::path& base) {
  if (p.empty()) return "";
  const fs::path rel = p.lexically_relative(base);
  if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  return p.generic_string();
}

}  // namespace

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("manifest " + path.string() + " cannot be opened");
  const fs::path base = fs::absolute(path).parent_path();
  std::vector<ManifestEntry> out;
  std::set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (!header) {
      if (line != kHeader) throw DataError(where + ": expected header '" + kHeader + "'");
      header = true;
      continue;
    }
    const auto cells = split_row(line);
    if (cells.size() != 6) {
      throw DataError(where + ": expected 6 fields, found " + std::to_string(cells.size()));
    }
    ManifestEntry e{cells[0], resolve(base, cells[1]), resolve(base, cells[2]),
                    resolve(base, cells[3]), cells[4], cells[5]};
    if (e.id.empty()) throw DataError(where + ": empty utterance id");
    if (!ids.insert(e.id).second) throw DataError(where + ": duplicate utterance id '" + e.id + "'");
    if (e.speech.empty()) throw DataError(where + ": no speech file for '" + e.id + "'");
    if (e.egg.empty() && e.labels.empty()) {
      throw DataError(where + ": '" + e.id + "' needs an egg or a labels file");
    }
    for (const fs::path* p : {&e.speech, &e.egg, &e.labels}) {
      if (!p->empty() && !fs::exists(*p)) throw DataError(where + ": missing file " + p->string());
    }
    out.push_back(std::move(e));
  }
  if (!header) throw DataError("manifest " + path.string() + " is empty");
  return out;
}

void write_manifest(const std::vector<ManifestEntry>& entries, const fs::path& path) {
  const fs::path base = fs::absolute(path).parent_path();
  std::ostringstream os;
  os << kHeader << "\n";
  for (const ManifestEntry& e : entries) {
    os << e.id << "," << relative_to(e.speech, base) << "," << relative_to(e.egg, base) << ","
       << relative_to(e.labels, base) << "," << e.speaker << "," << e.dataset << "\n";
  }
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  f << os.str();
  if (!f) throw IoError("cannot write manifest " + path.string());
}

std::vector<UtteranceRef> utterance_refs(const std::vector<ManifestEntry>& entries) {
  std::vector<UtteranceRef> refs;
  refs.reserve(entries.size());
  for (const ManifestEntry& e : entries) refs.push_back({e.id, e.speaker, e.dataset});
  return refs;
}

}  // namespace gci::harness
