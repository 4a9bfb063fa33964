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

// Corpus manifest: a CSV file with the header
//
//   id,speech,egg,labels,speaker,dataset
//
// one utterance per row.  speech is required and so is one of egg (GCIs
// are then taken from the dEGG) or labels.  Relative paths are relative to
// the manifest's directory.

#ifndef GCI_HARNESS_MANIFEST_HPP_
#define GCI_HARNESS_MANIFEST_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "gci/framing.hpp"

namespace gci::harness {

struct ManifestEntry {
  std::string id;
  std::filesystem::path speech;
  std::filesystem::path egg;     // may be empty
  std::filesystem::path labels;  // may be empty
  std::string speaker;
  std::string dataset;

  bool operator==(const ManifestEntry&) const = default;
};

// Throws DataError for malformed rows, duplicate ids or missing files.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

// Paths under the manifest's directory are written relative to it.
void write_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& path);

std::vector<UtteranceRef> utterance_refs(const std::vector<ManifestEntry>& entries);

}  // namespace gci::harness

#endif  // GCI_HARNESS_MANIFEST_HPP_
