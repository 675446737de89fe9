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

#include "biasaudit/dataset/image_store.hpp"

#include "biasaudit/core/error.hpp"
#include "biasaudit/dataset/image_io.hpp"
#include "biasaudit/dataset/synthetic.hpp"

namespace biasaudit::dataset {

ImageStore::ImageStore(std::filesystem::path cache_dir) : cache_(PreprocessCache(std::move(cache_dir))) {}

Image ImageStore::load(const DatasetManifest& manifest, std::size_t index) const {
  if (index >= manifest.images.size()) throw Error("image index out of range");
  const ImageRecord& record = manifest.images[index];
  if (!record.decode_ok) throw Error("image not decodable: " + record.image_id);
  if (is_synthetic_uri(manifest.root_uri)) {
    return render_synthetic(SyntheticStyle::from_uri(manifest.root_uri), record);
  }
  if (cache_) {
    if (auto hit = cache_->load(manifest.dataset_id, record.image_id)) return std::move(*hit);
  }
  Image image = preprocess_image(decode_image_file(std::filesystem::path(manifest.root_uri) / record.relative_path));
  if (cache_) cache_->store(manifest.dataset_id, record.image_id, image);
  return image;
}

}  // namespace biasaudit::dataset
