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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "biasaudit/core/image.hpp"
#include "biasaudit/dataset/image_store.hpp"
#include "biasaudit/dataset/manifest.hpp"
#include "biasaudit/dataset/sampling.hpp"
#include "biasaudit/transform/corruption.hpp"

namespace biasaudit::train {

/// One class of a dataset-classification task: a source manifest plus the
/// sampled train and validation indices. The class label is its position.
struct ClassSource {
  std::string name;
  std::shared_ptr<const dataset::DatasetManifest> manifest;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> val_indices;
  /// Overrides the task-wide corruption for this class only. Used to build
  /// positive controls where classes differ by a known signature.
  std::optional<transform::CorruptionSpec> corruption;
};

ClassSource class_from_split(std::shared_ptr<const dataset::DatasetManifest> manifest,
                             const dataset::SplitSpec& split);

struct ExampleRef {
  int label = 0;
  std::size_t index = 0;  // manifest index

  friend bool operator==(const ExampleRef&, const ExampleRef&) = default;
};

enum class Subset { train, val };

/// The data-preparation stage: resolves examples to stored images with the
/// (per-image deterministic) corruption already applied. Augmentation happens
/// later, per draw, in the trainer.
class LabeledImages {
 public:
  LabeledImages(std::vector<ClassSource> classes, transform::CorruptionSpec corruption,
                dataset::ImageStore store = {});

  int num_classes() const { return static_cast<int>(classes_.size()); }
  const ClassSource& source(int label) const { return classes_.at(static_cast<std::size_t>(label)); }
  const std::vector<ClassSource>& sources() const { return classes_; }
  const transform::CorruptionSpec& corruption() const { return corruption_; }
  std::vector<std::string> class_names() const;

  /// Examples in class order, then ascending manifest index.
  std::vector<ExampleRef> examples(Subset subset) const;
  /// Evenly strided subset of at most max_count examples (0 = all).
  std::vector<ExampleRef> examples(Subset subset, std::size_t max_count) const;

  Image prepared(const ExampleRef& ex) const;
  std::string image_id(const ExampleRef& ex) const;

 private:
  std::vector<ClassSource> classes_;
  transform::CorruptionSpec corruption_;
  dataset::ImageStore store_;
};

/// Serialized evaluation set: manifests by path plus indices per class.
nlohmann::json eval_set_to_json(const LabeledImages& data, const std::vector<std::string>& manifest_paths);
LabeledImages eval_set_from_json(const nlohmann::json& j);

}  // namespace biasaudit::train
