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
#include <optional>

#include "biasaudit/core/image.hpp"
#include "biasaudit/dataset/manifest.hpp"
#include "biasaudit/dataset/preprocess.hpp"

namespace biasaudit::dataset {

/// Resolves manifest records to preprocessed RGB images. File-backed
/// manifests are decoded from root_uri/relative_path (through the optional
/// cache); synthetic manifests are rendered. Safe for concurrent readers.
class ImageStore {
 public:
  ImageStore() = default;
  explicit ImageStore(std::filesystem::path cache_dir);

  Image load(const DatasetManifest& manifest, std::size_t index) const;

 private:
  std::optional<PreprocessCache> cache_;
};

}  // namespace biasaudit::dataset
