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

#include "biasaudit/train/labeled_images.hpp"

#include <json.hpp>

#include "biasaudit/core/error.hpp"

namespace biasaudit::train {

ClassSource class_from_split(std::shared_ptr<const dataset::DatasetManifest> manifest,
                             const dataset::SplitSpec& split) {
  ClassSource c;
  c.name = split.dataset_id;
  c.manifest = std::move(manifest);
  c.train_indices = split.train_indices;
  c.val_indices = split.val_indices;
  return c;
}

LabeledImages::LabeledImages(std::vector<ClassSource> classes, transform::CorruptionSpec corruption,
                             dataset::ImageStore store)
    : classes_(std::move(classes)), corruption_(corruption), store_(std::move(store)) {
  if (classes_.size() < 2) throw Error("dataset classification needs at least 2 classes");
  corruption_.validate();
  for (const auto& c : classes_) {
    if (!c.manifest) throw Error("class without manifest: " + c.name);
    if (c.corruption) c.corruption->validate();
    for (auto i : c.train_indices) if (i >= c.manifest->images.size()) throw Error("train index out of range in " + c.name);
    for (auto i : c.val_indices) if (i >= c.manifest->images.size()) throw Error("val index out of range in " + c.name);
  }
}

std::vector<std::string> LabeledImages::class_names() const {
  std::vector<std::string> out;
  for (const auto& c : classes_) out.push_back(c.name);
  return out;
}

std::vector<ExampleRef> LabeledImages::examples(Subset subset) const {
  std::vector<ExampleRef> out;
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    const auto& idx = subset == Subset::train ? classes_[c].train_indices : classes_[c].val_indices;
    for (auto i : idx) out.push_back({static_cast<int>(c), i});
  }
  return out;
}

std::vector<ExampleRef> LabeledImages::examples(Subset subset, std::size_t max_count) const {
  auto all = examples(subset);
  if (max_count == 0 || all.size() <= max_count) return all;
  std::vector<ExampleRef> out;
  out.reserve(max_count);
  for (std::size_t i = 0; i < max_count; ++i) out.push_back(all[i * all.size() / max_count]);
  return out;
}

std::string LabeledImages::image_id(const ExampleRef& ex) const {
  const auto& src = source(ex.label);
  return src.manifest->dataset_id + "/" + src.manifest->images.at(ex.index).image_id;
}

Image LabeledImages::prepared(const ExampleRef& ex) const {
  const auto& src = source(ex.label);
  Image stored = store_.load(*src.manifest, ex.index);
  const auto& spec = src.corruption ? *src.corruption : corruption_;
  return transform::apply_corruption(stored, spec, image_id(ex));
}

nlohmann::json eval_set_to_json(const LabeledImages& data, const std::vector<std::string>& manifest_paths) {
  if (manifest_paths.size() != data.sources().size()) throw Error("one manifest path per class required");
  nlohmann::json classes = nlohmann::json::array();
  for (std::size_t c = 0; c < data.sources().size(); ++c) {
    const auto& src = data.sources()[c];
    nlohmann::json jc = {{"name", src.name},
                         {"manifest", manifest_paths[c]},
                         {"train_indices", src.train_indices},
                         {"val_indices", src.val_indices}};
    if (src.corruption) jc["corruption"] = transform::corruption_to_json(*src.corruption);
    classes.push_back(std::move(jc));
  }
  return {{"classes", classes}, {"corruption", transform::corruption_to_json(data.corruption())}};
}

LabeledImages eval_set_from_json(const nlohmann::json& j) {
  std::vector<ClassSource> classes;
  for (const auto& jc : j.at("classes")) {
    ClassSource c;
    c.name = jc.at("name").get<std::string>();
    const auto manifest_ref = jc.at("manifest").get<std::string>();
    c.manifest = std::make_shared<const dataset::DatasetManifest>(dataset::register_dataset(manifest_ref));
    c.train_indices = jc.value("train_indices", std::vector<std::size_t>{});
    c.val_indices = jc.value("val_indices", std::vector<std::size_t>{});
    if (jc.contains("corruption")) c.corruption = transform::corruption_from_json(jc["corruption"]);
    classes.push_back(std::move(c));
  }
  transform::CorruptionSpec corruption;
  if (j.contains("corruption")) corruption = transform::corruption_from_json(j["corruption"]);
  return LabeledImages(std::move(classes), corruption);
}

}  // namespace biasaudit::train
