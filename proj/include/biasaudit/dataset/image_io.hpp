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
#include <filesystem>
#include <span>
#include <vector>

#include "biasaudit/core/image.hpp"

namespace biasaudit::dataset {

/// Decodes a file with its native channel count (1, 3 or 4), RGB(A) order,
/// values scaled to [0, 1]. Throws biasaudit::Error when undecodable.
Image decode_image_file(const std::filesystem::path& path);
Image decode_image_bytes(std::span<const std::uint8_t> bytes);

/// Lossless 8-bit PNG encoding of a 1/3/4 channel image.
std::vector<std::uint8_t> encode_png(const Image& image);
void write_png(const Image& image, const std::filesystem::path& path);

bool has_image_extension(const std::filesystem::path& path);

}  // namespace biasaudit::dataset
