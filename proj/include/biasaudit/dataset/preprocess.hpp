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

#include <filesystem>
#include <optional>
#include <string>

#include "biasaudit/core/image.hpp"

namespace biasaudit::dataset {

inline constexpr int kStoredShortSide = 500;
inline constexpr int kPreprocessVersion = 1;

/// Ingestion-time preprocessing: converts to 3-channel RGB and, when the
/// shorter side exceeds 500 pixels, resizes (aspect preserved) so that it is
/// exactly 500. Smaller images are returned unchanged.
Image preprocess_image(const Image& raw);

/// Grayscale is replicated, alpha dropped.
Image to_rgb(const Image& raw);

/// Content-addressed on-disk cache of preprocessed images, keyed by
/// (image_id, preprocess version). Files are lossless PNG.
class PreprocessCache {
 public:
  explicit PreprocessCache(std::filesystem::path dir);

  std::filesystem::path path_for(const std::string& dataset_id, const std::string& image_id) const;
  std::optional<Image> load(const std::string& dataset_id, const std::string& image_id) const;
  void store(const std::string& dataset_id, const std::string& image_id, const Image& image) const;

 private:
  std::filesystem::path dir_;
};

}  // namespace biasaudit::dataset
