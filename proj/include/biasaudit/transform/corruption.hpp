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

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "biasaudit/core/image.hpp"

namespace biasaudit::transform {

enum class CorruptionKind { none, color_jitter, gaussian_noise, gaussian_blur, low_resolution };

std::string_view to_string(CorruptionKind kind);
CorruptionKind corruption_kind_from_string(std::string_view name);

/// A deterministic per-image corruption applied identically to training and
/// validation data. `parameter` is the jitter strength, the noise std (as a
/// fraction of the [0,1] range), the blur radius in pixels, or the low
/// resolution side length, depending on kind.
struct CorruptionSpec {
  CorruptionKind kind = CorruptionKind::none;
  double parameter = 0.0;
  std::uint64_t per_image_seed_base = 0;

  /// Throws biasaudit::Error for a non-positive parameter on a non-none kind.
  void validate() const;
  std::string label() const;

  friend bool operator==(const CorruptionSpec&, const CorruptionSpec&) = default;
};

nlohmann::json corruption_to_json(const CorruptionSpec& spec);
CorruptionSpec corruption_from_json(const nlohmann::json& j);

/// Pure function of (image, spec, image_id). Output has the input's size and
/// values are clipped to [0, 1]. kind=none returns the input unchanged.
Image apply_corruption(const Image& image, const CorruptionSpec& spec, std::string_view image_id);

// Building blocks, exposed for tests and for RandAugment.
Image gaussian_blur(const Image& image, int radius);
Image color_jitter(const Image& image, double brightness, double contrast, double saturation, double hue_shift);

}  // namespace biasaudit::transform
