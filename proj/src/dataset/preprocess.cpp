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

#include "biasaudit/dataset/preprocess.hpp"

#include <cmath>

#include "biasaudit/core/error.hpp"
#include "biasaudit/core/hash.hpp"
#include "biasaudit/dataset/image_io.hpp"
#include "biasaudit/transform/resample.hpp"

namespace biasaudit::dataset {

Image to_rgb(const Image& raw) {
  if (raw.channels == 3) return raw;
  if (raw.channels != 1 && raw.channels != 4) throw Error("unsupported channel count");
  Image out(raw.width, raw.height, 3);
  for (int y = 0; y < raw.height; ++y) {
    for (int x = 0; x < raw.width; ++x) {
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = raw.at(x, y, raw.channels == 1 ? 0 : c);
    }
  }
  return out;
}

Image preprocess_image(const Image& raw) {
  if (raw.width < 1 || raw.height < 1) throw Error("undecodable image");
  Image rgb = to_rgb(raw);
  const int shorter = std::min(rgb.width, rgb.height);
  if (shorter <= kStoredShortSide) return rgb;
  // Rounded (not truncated) so that e.g. 1000x800 maps to exactly 625x500.
  const double s = static_cast<double>(kStoredShortSide) / shorter;
  int w = kStoredShortSide;
  int h = kStoredShortSide;
  if (rgb.width > rgb.height) w = static_cast<int>(std::lround(rgb.width * s));
  if (rgb.height > rgb.width) h = static_cast<int>(std::lround(rgb.height * s));
  return transform::resize_bilinear(rgb, w, h);
}

PreprocessCache::PreprocessCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path PreprocessCache::path_for(const std::string& dataset_id,
                                                const std::string& image_id) const {
  const std::uint64_t key = hash64(hash64(static_cast<std::uint64_t>(kPreprocessVersion), dataset_id), image_id);
  const std::string name = hex64(key);
  return dir_ / name.substr(0, 2) / (name + ".png");
}

std::optional<Image> PreprocessCache::load(const std::string& dataset_id, const std::string& image_id) const {
  const auto path = path_for(dataset_id, image_id);
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    return to_rgb(decode_image_file(path));
  } catch (const Error&) {
    return std::nullopt;
  }
}

void PreprocessCache::store(const std::string& dataset_id, const std::string& image_id,
                            const Image& image) const {
  const auto path = path_for(dataset_id, image_id);
  std::filesystem::create_directories(path.parent_path());
  // Write-then-rename keeps concurrent readers from seeing partial files.
  auto tmp = path;
  tmp += ".tmp";
  write_png(image, tmp);
  std::filesystem::rename(tmp, path);
}

}  // namespace biasaudit::dataset
