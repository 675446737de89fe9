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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "biasaudit/core/image.hpp"
#include "biasaudit/train/labeled_images.hpp"
#include "biasaudit/train/model.hpp"
#include "biasaudit/train/nn.hpp"

namespace biasaudit::probe {

using train::Mat;

/// Frozen representation of a model input (already eval-transformed).
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  /// "trained_checkpoint" or "external_checkpoint".
  virtual std::string source() const = 0;
  virtual int layer_index() const = 0;
  virtual int feature_dim() const = 0;
  /// Identifies the extractor (weights and layer) for feature caching.
  virtual std::uint64_t fingerprint() const = 0;
  virtual std::vector<float> extract(const Image& input) = 0;
};

/// Globally pooled activations of one layer of a classifier. The classifier
/// is copied on construction, so later changes to the original do not leak in.
class ClassifierFeatureExtractor final : public FeatureExtractor {
 public:
  ClassifierFeatureExtractor(const train::Classifier& model, int layer_index,
                             std::string source = "trained_checkpoint");
  std::string source() const override { return source_; }
  int layer_index() const override { return layer_; }
  int feature_dim() const override { return dim_; }
  std::uint64_t fingerprint() const override { return fingerprint_; }
  std::vector<float> extract(const Image& input) override;

 private:
  std::unique_ptr<train::Classifier> model_;
  int layer_;
  int dim_;
  std::string source_;
  std::uint64_t fingerprint_;
};

/// Hash of a classifier's weights, layout and architecture.
std::uint64_t weights_fingerprint(train::Classifier& model);

/// Identifies an image set: ordered image ids plus the corruption applied.
std::uint64_t split_fingerprint(const train::LabeledImages& data, const std::vector<train::ExampleRef>& examples);

/// Features as [feature_dim, n]: column i belongs to examples[i]. With a
/// cache_dir, results are stored under (extractor, split) fingerprints and
/// reused on later calls.
Mat extract_features(FeatureExtractor& extractor, const train::LabeledImages& data,
                     const std::vector<train::ExampleRef>& examples,
                     const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

struct FeatureCacheHeader {
  std::uint64_t rows = 0;  // images
  std::uint64_t cols = 0;  // feature dim
  std::uint32_t dtype = 1;  // 1 = float32 little-endian
  std::uint64_t extractor_hash = 0;
  std::uint64_t split_hash = 0;
};

/// Binary matrix file: magic, header, then rows x cols float32 values with
/// one image per row.
void save_feature_cache(const std::filesystem::path& path, const Mat& features, std::uint64_t extractor_hash,
                        std::uint64_t split_hash);
FeatureCacheHeader read_feature_cache_header(const std::filesystem::path& path);
Mat load_feature_cache(const std::filesystem::path& path, FeatureCacheHeader* header = nullptr);

std::filesystem::path feature_cache_path(const std::filesystem::path& dir, std::uint64_t extractor_hash,
                                         std::uint64_t split_hash);

}  // namespace biasaudit::probe
