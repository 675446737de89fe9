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
#include <cstdint>
#include <string>

#include "biasaudit/core/image.hpp"
#include "biasaudit/dataset/manifest.hpp"

namespace biasaudit::dataset {

/// Parameters of a procedural image source. Encoded into the manifest root_uri
/// as "synthetic://shapes?seed=..&min_side=..&max_side=..&shapes=..&saturation=..&brightness=..".
struct SyntheticStyle {
  std::uint64_t seed = 0;
  int min_side = 256;
  int max_side = 320;
  int mean_shapes = 8;
  double saturation = 1.0;
  double brightness = 0.0;

  std::string to_uri() const;
  static SyntheticStyle from_uri(const std::string& uri);
};

bool is_synthetic_uri(const std::string& uri);

/// Manifest of `count` procedural images with ids "img_000000", ...
DatasetManifest make_synthetic_manifest(const std::string& dataset_id, std::size_t count,
                                        const SyntheticStyle& style);

/// Renders one image: gradient background plus random hard-edged shapes and
/// stripes. Output depends only on (style, record.image_id, record size).
Image render_synthetic(const SyntheticStyle& style, const ImageRecord& record);

}  // namespace biasaudit::dataset
