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

#include "biasaudit/core/image.hpp"

namespace biasaudit::transform {

/// Separable bilinear (triangle-filter) resampling with pixel centers at
/// half-integers. When shrinking, the filter support widens by the scale
/// factor so the result is antialiased; when enlarging it is plain bilinear
/// interpolation. Taps falling outside the image are dropped and the remaining
/// weights renormalized.
Image resize_bilinear(const Image& src, int out_width, int out_height);

Image crop(const Image& src, int x, int y, int width, int height);

/// Aspect-preserving resize so that min(width, height) == target. The longer
/// side is truncated (target * long / short), matching common vision tooling.
Image resize_shorter_side(const Image& src, int target);

/// Crop of size (width, height) at offset (round((W-w)/2), round((H-h)/2)).
Image center_crop(const Image& src, int width, int height);

Image flip_horizontal(const Image& src);

void clamp01(Image& image);

}  // namespace biasaudit::transform
