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
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "biasaudit/core/image.hpp"
#include "biasaudit/dataset/manifest.hpp"
#include "biasaudit/dataset/sampling.hpp"
#include "biasaudit/dataset/synthetic.hpp"
#include "biasaudit/train/labeled_images.hpp"

namespace biasaudit::testing {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("biasaudit_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline Image constant_image(int w, int h, float value, int channels = 3) { return Image(w, h, channels, value); }

/// Deterministic non-trivial content: value depends on position and channel.
inline Image pattern_image(int w, int h, int channels = 3) {
  Image img(w, h, channels);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < channels; ++c) {
        img.at(x, y, c) = static_cast<float>(((x * 7 + y * 13 + c * 29) % 97) / 96.0);
      }
    }
  }
  return img;
}

inline dataset::DatasetManifest numbered_manifest(const std::string& id, std::size_t n) {
  dataset::DatasetManifest m;
  m.dataset_id = id;
  m.root_uri = "/nonexistent";
  for (std::size_t i = 0; i < n; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "img_%04zu", i);
    m.images.push_back({name, std::string(name) + ".png", 64, 48, true});
  }
  dataset::finalize_manifest(m);
  return m;
}

/// k pseudo-dataset classes drawn from one synthetic source.
inline train::LabeledImages pseudo_task(std::size_t k, std::size_t n_train, std::size_t n_val, std::uint64_t seed,
                                        transform::CorruptionSpec corruption = {}) {
  auto m = std::make_shared<const dataset::DatasetManifest>(
      dataset::make_synthetic_manifest("src", k * (n_train + n_val) + 8, dataset::SyntheticStyle{}));
  std::vector<train::ClassSource> classes;
  for (const auto& s : dataset::build_pseudo_datasets(*m, k, n_train, seed, n_val)) {
    classes.push_back(train::class_from_split(m, s));
  }
  return train::LabeledImages(std::move(classes), corruption);
}

}  // namespace biasaudit::testing
