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
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "biasaudit/probe/probe.hpp"
#include "biasaudit/train/model.hpp"
#include "biasaudit/train/trainer.hpp"
#include "biasaudit/transform/augment.hpp"
#include "biasaudit/transform/corruption.hpp"

namespace biasaudit::experiment {

/// One class source: a registered manifest, optionally with its own
/// corruption signature.
struct DatasetSource {
  std::string id;
  std::string manifest;
  std::optional<transform::CorruptionSpec> corruption;
  friend bool operator==(const DatasetSource&, const DatasetSource&) = default;
};

/// Pseudo-dataset control: k disjoint sets drawn from one source.
struct PseudoSpec {
  DatasetSource source;
  std::size_t k = 3;
  friend bool operator==(const PseudoSpec&, const PseudoSpec&) = default;
};

/// Downstream labeled set for transfer probing; label = class position.
struct ProbeTask {
  std::vector<DatasetSource> classes;
  std::size_t train_per_class = 0;
  std::size_t val_per_class = 0;
  probe::ProbeConfig config;
};

/// Everything needed to reproduce one audit run.
struct ExperimentConfig {
  std::vector<DatasetSource> datasets;
  std::optional<PseudoSpec> pseudo;
  std::size_t train_per_dataset = 0;
  std::size_t val_per_dataset = 0;
  train::ModelSpec model;
  train::TrainConfig train;
  transform::AugmentationPolicy augmentation;
  transform::CorruptionSpec corruption;
  std::optional<ProbeTask> probe;
  std::uint64_t seed = 0;

  std::size_t num_classes() const { return pseudo ? pseudo->k : datasets.size(); }
  /// Class names in label order.
  std::vector<std::string> class_names() const;
  void validate() const;
};

nlohmann::json dataset_source_to_json(const DatasetSource& d);
DatasetSource dataset_source_from_json(const nlohmann::json& j);
nlohmann::json experiment_to_json(const ExperimentConfig& c);
ExperimentConfig experiment_from_json(const nlohmann::json& j);

/// Hash of the canonical (key-sorted, compact) JSON form, as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);
std::string canonical_hash(const nlohmann::json& j);

/// All k-element subsets of pool, lexicographic by position in pool.
std::vector<std::vector<std::string>> enumerate_combinations(const std::vector<std::string>& pool, std::size_t k);

}  // namespace biasaudit::experiment
