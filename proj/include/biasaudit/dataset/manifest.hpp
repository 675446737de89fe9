/**
 * Copyright 2026 The biasaudit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace biasaudit::dataset {

struct ImageRecord {
  std::string image_id;
  std::string relative_path;
  int width = 0;
  int height = 0;
  bool decode_ok = true;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

/// One dataset: identity plus image records sorted by image_id.
///
/// predefined_train_split holds manifest indices (positions in the sorted
/// record list). When present, only those records are eligible for sampling.
struct DatasetManifest {
  std::string dataset_id;
  std::string display_name;
  std::string root_uri;
  std::string notes;
  std::vector<ImageRecord> images;
  std::optional<std::vector<std::size_t>> predefined_train_split;

  /// Indices eligible for sampling, ascending: decode_ok and inside the
  /// predefined train split when one exists.
  std::vector<std::size_t> usable_indices() const;
  std::optional<std::size_t> find(const std::string& image_id) const;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

/// Loads a line-delimited JSON manifest. Records are sorted by image_id;
/// duplicate ids and empty manifests are rejected.
DatasetManifest register_dataset(const std::filesystem::path& manifest_path);
DatasetManifest parse_manifest(std::istream& in, const std::string& source_name = "<stream>");

void write_manifest(const DatasetManifest& manifest, std::ostream& out);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Sorts records and validates the invariants. Used by every constructor path.
void finalize_manifest(DatasetManifest& manifest);

struct BuildOptions {
  std::string display_name;
  std::string notes;
  /// When set, every decodable image is preprocessed into this cache.
  std::optional<std::filesystem::path> cache_dir;
};

/// Scans `root` recursively for image files and decodes each one to record its
/// size. Files that fail to decode are kept with decode_ok=false so they are
/// visible in the manifest but never sampled.
DatasetManifest build_manifest_from_directory(const std::filesystem::path& root,
                                              const std::string& dataset_id,
                                              const BuildOptions& options = {});

}  // namespace biasaudit::dataset
